"""Exception types shared across the package."""

from __future__ import annotations


class DpPsiError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(DpPsiError, ValueError):
    """A numeric parameter is outside its documented domain."""


class InvalidElementError(DpPsiError):
    """A byte string failed to decode as a valid group element.

    ``index`` is the position of the offending element within the batch
    that was being processed, or None for a standalone decode.
    """

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


class DuplicateItemError(DpPsiError):
    """An input set contained the same item more than once."""


class PhaseError(DpPsiError):
    """A session method was called out of order or twice."""


class ProtocolAbort(DpPsiError):
    """The protocol run cannot continue.

    Raised for malformed peer messages, framing failures, mid-stream
    disconnects, and explicit abort frames from the peer.
    """


class FramingError(ProtocolAbort):
    """A wire frame could not be parsed."""


class IntersectionTooSmallError(DpPsiError):
    """The intersection is below the size needed for a finite sender-side
    privacy guarantee at the requested parameters.

    ``lower_bound`` is the minimal intersection size that would work.
    """

    def __init__(self, message: str, lower_bound: int):
        super().__init__(message)
        self.lower_bound = lower_bound
