"""Prime-order groups with commutative exponentiation.

Two backends share one interface:

* :class:`Ristretto255Group` is the production group.  Elements are points of
  the ristretto255 prime-order group (curve25519 class), bound through
  ``ctypes`` to the system libsodium.  Encodings are the canonical 32-byte
  strings defined by ristretto255; equal points always encode identically,
  which is what lets the parties intersect ciphertexts byte-wise.
* :class:`TinyGroup` is the quadratic-residue subgroup of Z_p* for a small
  (62-bit) safe prime.  Offers no security; it exists so that statistical
  tests can run thousands of protocol instances quickly.  Encodings are
  padded to the same 32-byte width so the wire format is identical.

Hashing an item into the group goes through a full-width hash of the item
(SHA-512) and a hash-to-group map whose discrete logs are unknown to
everyone.  Mapping a hash to a scalar and multiplying the base point would
hand every party the discrete logs of all hashed items and break the
protocol's one-more-DH style security, so neither backend does that.
"""

from __future__ import annotations

import ctypes
import ctypes.util
import hashlib
from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import gmpy2

from .errors import InvalidElementError, ParameterError
from .rng import RandomSource

ELEMENT_SIZE = 32


@dataclass(frozen=True)
class Scalar:
    """Exponent, reduced modulo the group order and nonzero."""

    value: int = field(repr=False)  # repr hidden: scalars are secret keys


@dataclass(frozen=True)
class GroupElement:
    """A group element in canonical encoding (ELEMENT_SIZE bytes)."""

    encoding: bytes

    def __post_init__(self):
        if len(self.encoding) != ELEMENT_SIZE:
            raise InvalidElementError(
                f"element encoding must be {ELEMENT_SIZE} bytes, got {len(self.encoding)}"
            )


@dataclass(frozen=True)
class HashedItem:
    """An input item together with its hashed group element."""

    source: bytes
    point: GroupElement


class Group(ABC):
    """Prime-order group interface used by the protocol."""

    name: str
    order: int
    element_size: int = ELEMENT_SIZE

    @abstractmethod
    def hash_to_group(self, data: bytes) -> GroupElement:
        """Map arbitrary bytes to a group element with unknown discrete log."""

    @abstractmethod
    def exp(self, element: GroupElement, scalar: Scalar) -> GroupElement:
        """Raise element to the scalar.  Raises InvalidElementError if the
        encoding is not a usable group element."""

    @abstractmethod
    def decode(self, raw: bytes, index: int | None = None) -> GroupElement:
        """Validate raw bytes as a canonical element encoding."""

    def scalar(self, value: int) -> Scalar:
        if not 0 < value < self.order:
            raise ParameterError(f"scalar must be in [1, {self.order - 1}]")
        return Scalar(value)

    def gen_secret(self, rng: RandomSource) -> Scalar:
        """Uniform nonzero scalar.  Draws from OS entropy when rng is secure."""
        while True:
            value = int.from_bytes(rng.token_bytes(64), "little") % self.order
            if value != 0:
                return Scalar(value)

    def scalar_invert(self, scalar: Scalar) -> Scalar:
        return Scalar(pow(scalar.value, -1, self.order))

    def batch_exp(self, elements: list[GroupElement], scalar: Scalar) -> list[GroupElement]:
        """Exponentiate a batch; the first failure is reported with its index."""
        out = []
        for i, element in enumerate(elements):
            try:
                out.append(self.exp(element, scalar))
            except InvalidElementError as exc:
                raise InvalidElementError(str(exc), index=i) from None
        return out

    def hash_items(self, items: list[bytes]) -> list[HashedItem]:
        return [HashedItem(item, self.hash_to_group(item)) for item in items]


# ---------------------------------------------------------------------------
# ristretto255 via libsodium


def _load_sodium() -> ctypes.CDLL:
    candidates = ["libsodium.so.23", "libsodium.so.26", "libsodium.so.18", "libsodium.so"]
    found = ctypes.util.find_library("sodium")
    if found:
        candidates.insert(0, found)
    last_error: Exception | None = None
    for name in candidates:
        try:
            lib = ctypes.CDLL(name)
        except OSError as exc:
            last_error = exc
            continue
        if lib.sodium_init() < 0:
            raise RuntimeError("libsodium failed to initialize")
        return lib
    raise RuntimeError(f"libsodium shared library not found: {last_error}")


_sodium: ctypes.CDLL | None = None


def _sodium_lib() -> ctypes.CDLL:
    global _sodium
    if _sodium is None:
        lib = _load_sodium()
        buf = ctypes.c_char_p
        lib.crypto_core_ristretto255_from_hash.argtypes = [buf, buf]
        lib.crypto_core_ristretto255_from_hash.restype = ctypes.c_int
        lib.crypto_core_ristretto255_is_valid_point.argtypes = [buf]
        lib.crypto_core_ristretto255_is_valid_point.restype = ctypes.c_int
        lib.crypto_scalarmult_ristretto255.argtypes = [buf, buf, buf]
        lib.crypto_scalarmult_ristretto255.restype = ctypes.c_int
        _sodium = lib
    return _sodium


# order of the ristretto255 group (= order of the curve25519 prime subgroup)
RISTRETTO_ORDER = 2**252 + 27742317777372353535851937790883648493


class Ristretto255Group(Group):
    name = "ristretto255"
    order = RISTRETTO_ORDER

    def __init__(self):
        self._lib = _sodium_lib()
        self._from_hash = self._lib.crypto_core_ristretto255_from_hash
        self._scalarmult = self._lib.crypto_scalarmult_ristretto255
        self._is_valid = self._lib.crypto_core_ristretto255_is_valid_point

    def hash_to_group(self, data: bytes) -> GroupElement:
        digest = hashlib.sha512(data).digest()
        out = ctypes.create_string_buffer(ELEMENT_SIZE)
        self._from_hash(out, digest)
        return GroupElement(out.raw)

    def exp(self, element: GroupElement, scalar: Scalar) -> GroupElement:
        out = ctypes.create_string_buffer(ELEMENT_SIZE)
        n = scalar.value.to_bytes(ELEMENT_SIZE, "little")
        if self._scalarmult(out, n, element.encoding) != 0:
            raise InvalidElementError("encoding is not a usable group element")
        return GroupElement(out.raw)

    def decode(self, raw: bytes, index: int | None = None) -> GroupElement:
        if len(raw) != ELEMENT_SIZE:
            raise InvalidElementError(
                f"element encoding must be {ELEMENT_SIZE} bytes", index=index
            )
        if self._is_valid(raw) != 1:
            raise InvalidElementError("invalid element encoding", index=index)
        return GroupElement(raw)

    def batch_exp(self, elements: list[GroupElement], scalar: Scalar) -> list[GroupElement]:
        # Hot path for the protocol: avoid per-element attribute lookups.
        scalarmult = self._scalarmult
        n = scalar.value.to_bytes(ELEMENT_SIZE, "little")
        make_buf = ctypes.create_string_buffer
        out = []
        for i, element in enumerate(elements):
            buf = make_buf(ELEMENT_SIZE)
            if scalarmult(buf, n, element.encoding) != 0:
                raise InvalidElementError("encoding is not a usable group element", index=i)
            out.append(GroupElement(buf.raw))
        return out


# ---------------------------------------------------------------------------
# tiny modular group for statistical tests


def _is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for n < 3.3e24."""
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
    for p in small:
        if n % p == 0:
            return n == p
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


# 62-bit safe prime: (TINY_PRIME - 1) / 2 is also prime
TINY_PRIME = 2305843009213699919


class TinyGroup(Group):
    """Quadratic residues mod a safe prime.

    Insecure by construction (the modulus fits in a machine word); exists so
    statistical tests can run thousands of protocol instances in seconds.
    Elements are encoded as 32-byte little-endian integers to keep the wire
    format identical to the production group.
    """

    name = "tiny"

    def __init__(self, p: int = TINY_PRIME):
        q, rem = divmod(p - 1, 2)
        if rem != 0 or not _is_prime(p) or not _is_prime(q):
            raise ParameterError("modulus must be a safe prime")
        self.p = p
        self.order = q
        self._mp = gmpy2.mpz(p)  # gmp modpow is ~10x faster than builtin pow here

    def hash_to_group(self, data: bytes) -> GroupElement:
        digest = hashlib.sha512(data).digest()
        while True:
            value = int.from_bytes(digest, "little") % self.p
            element = value * value % self.p  # squaring clears the cofactor
            if element > 1:
                return GroupElement(element.to_bytes(ELEMENT_SIZE, "little"))
            digest = hashlib.sha512(digest).digest()

    def exp(self, element: GroupElement, scalar: Scalar) -> GroupElement:
        value = int.from_bytes(element.encoding, "little")
        if not 0 < value < self.p:
            raise InvalidElementError("encoding out of range")
        result = int(gmpy2.powmod(value, scalar.value, self._mp))
        return GroupElement(result.to_bytes(ELEMENT_SIZE, "little"))

    def decode(self, raw: bytes, index: int | None = None) -> GroupElement:
        if len(raw) != ELEMENT_SIZE:
            raise InvalidElementError(
                f"element encoding must be {ELEMENT_SIZE} bytes", index=index
            )
        value = int.from_bytes(raw, "little")
        if not 0 < value < self.p or gmpy2.powmod(value, self.order, self._mp) != 1:
            raise InvalidElementError("invalid element encoding", index=index)
        return GroupElement(raw)


_GROUPS = {"ristretto255": Ristretto255Group, "tiny": TinyGroup}


def make_group(name: str) -> Group:
    try:
        return _GROUPS[name]()
    except KeyError:
        raise ParameterError(f"unknown group {name!r}; choose from {sorted(_GROUPS)}") from None
