"""Bit-exact wire format for protocol messages.

Every message is one frame::

    4-byte little-endian length  (of everything after this field)
    1-byte type tag
    4-byte little-endian element/index count
    body: count * 32-byte group elements, or count * 4-byte LE indices

So a frame occupies 9 + len(body) bytes on the wire.  Abort frames carry a
UTF-8 reason in the body with count 0.  The format has no versioning or
extensibility on purpose: transcript sizes must be an exact function of the
set sizes so that communication accounting can be audited against a closed
formula (see :func:`transcript_bytes`).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import IntEnum

from .errors import FramingError, ParameterError
from .group import ELEMENT_SIZE, GroupElement

INDEX_SIZE = 4
HEADER_SIZE = 9  # length + tag + count
MAX_FRAME_PAYLOAD = 1 << 31  # sanity cap; a hostile length cannot OOM us

_LEN = struct.Struct("<I")
_HEAD = struct.Struct("<IBI")


class MessageKind(IntEnum):
    X_A = 0x01           # sender's encrypted set
    Y_B_SUB = 0x02       # receiver's encrypted subsample
    X_AB_PI = 0x03       # doubly-encrypted, permuted sender set
    INDEX_SET = 0x04     # positions of the reported intersection
    ABORT = 0x0F


_ELEMENT_KINDS = frozenset({MessageKind.X_A, MessageKind.Y_B_SUB, MessageKind.X_AB_PI})


@dataclass(frozen=True)
class ProtocolMessage:
    kind: MessageKind
    count: int
    body: bytes

    @property
    def encoded_size(self) -> int:
        return HEADER_SIZE + len(self.body)

    def encode(self) -> bytes:
        return _HEAD.pack(5 + len(self.body), self.kind, self.count) + self.body

    @classmethod
    def decode_payload(cls, payload: bytes) -> "ProtocolMessage":
        """Parse tag + count + body (a frame with the length prefix stripped)."""
        if len(payload) < 5:
            raise FramingError(f"frame payload too short: {len(payload)} bytes")
        tag = payload[0]
        try:
            kind = MessageKind(tag)
        except ValueError:
            raise FramingError(f"unknown message tag 0x{tag:02x}") from None
        count = int.from_bytes(payload[1:5], "little")
        body = payload[5:]
        msg = cls(kind=kind, count=count, body=body)
        msg._check_shape()
        return msg

    @classmethod
    def decode_frame(cls, frame: bytes) -> "ProtocolMessage":
        """Parse a full frame including the length prefix."""
        if len(frame) < 4:
            raise FramingError("frame shorter than its length prefix")
        (length,) = _LEN.unpack_from(frame)
        if length != len(frame) - 4:
            raise FramingError(
                f"frame length field says {length}, actual payload is {len(frame) - 4}"
            )
        return cls.decode_payload(frame[4:])

    def _check_shape(self) -> None:
        unit = None
        if self.kind in _ELEMENT_KINDS:
            unit = ELEMENT_SIZE
        elif self.kind == MessageKind.INDEX_SET:
            unit = INDEX_SIZE
        if unit is not None and len(self.body) != self.count * unit:
            raise FramingError(
                f"{self.kind.name} declares {self.count} entries but body is "
                f"{len(self.body)} bytes"
            )

    # --- constructors -----------------------------------------------------

    @classmethod
    def from_elements(
        cls, kind: MessageKind, elements: list[GroupElement]
    ) -> "ProtocolMessage":
        if kind not in _ELEMENT_KINDS:
            raise ParameterError(f"{kind.name} does not carry group elements")
        return cls(
            kind=kind,
            count=len(elements),
            body=b"".join(e.encoding for e in elements),
        )

    @classmethod
    def from_indices(cls, indices: list[int]) -> "ProtocolMessage":
        for idx in indices:
            if not 0 <= idx < 1 << 32:
                raise ParameterError(f"index {idx} does not fit in u32")
        return cls(
            kind=MessageKind.INDEX_SET,
            count=len(indices),
            body=b"".join(idx.to_bytes(INDEX_SIZE, "little") for idx in indices),
        )

    @classmethod
    def from_abort(cls, reason: str) -> "ProtocolMessage":
        return cls(kind=MessageKind.ABORT, count=0, body=reason.encode("utf-8"))

    # --- accessors ---------------------------------------------------------

    def element_encodings(self) -> list[bytes]:
        if self.kind not in _ELEMENT_KINDS:
            raise FramingError(f"{self.kind.name} does not carry group elements")
        body = self.body
        return [body[i : i + ELEMENT_SIZE] for i in range(0, len(body), ELEMENT_SIZE)]

    def indices(self) -> list[int]:
        if self.kind != MessageKind.INDEX_SET:
            raise FramingError(f"{self.kind.name} does not carry indices")
        body = self.body
        return [
            int.from_bytes(body[i : i + INDEX_SIZE], "little")
            for i in range(0, len(body), INDEX_SIZE)
        ]

    def abort_reason(self) -> str:
        if self.kind != MessageKind.ABORT:
            raise FramingError(f"{self.kind.name} is not an abort")
        return self.body.decode("utf-8", errors="replace")


def transcript_bytes(x_size: int, y_sub_size: int, dp_size: int) -> int:
    """Total bytes both parties put on the wire in one full run.

    Four frames: the sender's set, the receiver's subsample, the re-encrypted
    permuted sender set (same cardinality as the sender's set), and the index
    set.
    """
    return (
        4 * HEADER_SIZE
        + ELEMENT_SIZE * (2 * x_size + y_sub_size)
        + INDEX_SIZE * dp_size
    )
