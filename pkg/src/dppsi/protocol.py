"""Two-party set-intersection sessions.

Baseline flow (no privacy noise): both parties hash their items into the
group and encrypt with their own secret; because exponentiation commutes,
doubly-encrypted items from both sides match exactly on the intersection.

The private variant wraps that exchange in three mechanisms: the receiver
subsamples its set before sending (rate p_b), re-encrypts the sender's set
and returns it under a fresh uniform permutation, and the sender applies
randomized response (keep rate p_a, inject rate q) to the matched positions
before revealing them as an index set.  The receiver finishes by looking the
indices up in its retained plaintext subsample; payloads never travel.

Sessions are strict single-use state machines.  Any malformed peer message
aborts the session; there is no retry below the transport layer.

Message order on the wire::

    sender   --- encrypted set             --->  receiver
    receiver --- encrypted subsample       --->  sender
    receiver --- re-encrypted+shuffled set --->  sender
    sender   --- index set                 --->  receiver
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from enum import Enum, IntEnum

from .errors import (
    DuplicateItemError,
    InvalidElementError,
    ParameterError,
    PhaseError,
    ProtocolAbort,
)
from .group import Group, GroupElement, HashedItem, Scalar, make_group
from .mechanisms import MechanismParams, bernoulli_subsample, uniform_permutation, upsample
from .rng import RandomSource
from .wire import MessageKind, ProtocolMessage


class Role(Enum):
    SENDER = "sender"
    RECEIVER = "receiver"


class Phase(IntEnum):
    SETUP = 0
    ROUND1 = 1
    ROUND2 = 2
    ROUND3 = 3
    DONE = 4


class Provenance(Enum):
    X_A = "X_a"
    X_AB_PERMUTED = "X_ab_permuted"
    Y_B_SUB = "Y_b_sub"
    Y_AB_SUB = "Y_ab_sub"


@dataclass(frozen=True)
class EncryptedSet:
    """Ordered batch of encrypted elements with a fixed origin label."""

    elements: tuple[GroupElement, ...]
    provenance: Provenance

    def __post_init__(self):
        if len({e.encoding for e in self.elements}) != len(self.elements):
            raise DuplicateItemError(
                f"duplicate encodings in {self.provenance.value} set"
            )

    def __len__(self) -> int:
        return len(self.elements)


@dataclass(frozen=True)
class IndexSet:
    """Strictly increasing positions into the receiver's transmitted subsample."""

    indices: tuple[int, ...]

    def __post_init__(self):
        prev = -1
        for idx in self.indices:
            if idx <= prev:
                raise ParameterError("indices must be strictly increasing")
            if idx >= 1 << 32:
                raise ParameterError(f"index {idx} does not fit in u32")
            prev = idx

    def __len__(self) -> int:
        return len(self.indices)


@dataclass(frozen=True)
class RunStats:
    sent_bytes: int
    received_bytes: int
    wall_time_seconds: float = field(compare=False)  # timing never defines equality
    y_sub_size: int
    dp_size: int


@dataclass(frozen=True)
class DpIntersection:
    elements: list[bytes]
    payload_sum: float | None
    stats: RunStats


_DEFAULT_GROUP: Group | None = None


def default_group() -> Group:
    global _DEFAULT_GROUP
    if _DEFAULT_GROUP is None:
        _DEFAULT_GROUP = make_group("ristretto255")
    return _DEFAULT_GROUP


def _hash_sorted(
    group: Group, items: list[bytes], payloads: list[float] | None
) -> tuple[list[HashedItem], list[float] | None]:
    """Hash items and order them lexicographically by element encoding.

    The shared canonical order means neither party's transmission order
    carries information about insertion order; payloads follow their items.
    """
    if len(set(items)) != len(items):
        raise DuplicateItemError("input items must be deduplicated")
    hashed = group.hash_items(items)
    order = sorted(range(len(hashed)), key=lambda i: hashed[i].point.encoding)
    sorted_items = [hashed[i] for i in order]
    if payloads is None:
        return sorted_items, None
    if len(payloads) != len(items):
        raise ParameterError(
            f"got {len(payloads)} payloads for {len(items)} items"
        )
    return sorted_items, [float(payloads[i]) for i in order]


@dataclass
class SessionState:
    """Common state machine plumbing for both roles."""

    role: Role
    params: MechanismParams
    phase: Phase = field(default=Phase.SETUP, init=False)
    sent_bytes: int = field(default=0, init=False)
    received_bytes: int = field(default=0, init=False)

    def _advance(self, expected: Phase, target: Phase) -> None:
        if self.phase != expected:
            raise PhaseError(
                f"{self.role.value} session is in phase {self.phase.name}, "
                f"expected {expected.name}"
            )
        if target <= self.phase:
            raise PhaseError("phase transitions must be strictly monotone")
        self.phase = target

    def _emit(self, msg: ProtocolMessage) -> ProtocolMessage:
        self.sent_bytes += msg.encoded_size
        return msg

    def _take(self, msg: ProtocolMessage, expected: MessageKind) -> ProtocolMessage:
        self.received_bytes += msg.encoded_size
        if msg.kind == MessageKind.ABORT:
            self.phase = Phase.DONE
            raise ProtocolAbort(f"peer aborted: {msg.abort_reason()}")
        if msg.kind != expected:
            self.phase = Phase.DONE
            raise ProtocolAbort(
                f"expected {expected.name} message, got {msg.kind.name}"
            )
        return msg

    def _decode_set(
        self, group: Group, msg: ProtocolMessage, provenance: Provenance
    ) -> EncryptedSet:
        try:
            elements = tuple(
                group.decode(raw, index=i)
                for i, raw in enumerate(msg.element_encodings())
            )
            return EncryptedSet(elements=elements, provenance=provenance)
        except (InvalidElementError, DuplicateItemError):
            self.phase = Phase.DONE
            raise


class SenderSession(SessionState):
    """Holds the sender's secret and input; learns only {|Y_sub|, |X ∩ Y_sub|}."""

    def __init__(
        self,
        items: list[bytes],
        params: MechanismParams,
        rng: RandomSource,
        group: Group | None = None,
    ):
        super().__init__(role=Role.SENDER, params=params)
        self.group = group or default_group()
        self._rng = rng
        self._secret: Scalar = self.group.gen_secret(rng)
        self._hashed, _ = _hash_sorted(self.group, items, None)
        self._start = time.perf_counter()
        # filled during round 2; this is the sender's entire legitimate view
        self.y_sub_size: int | None = None
        self.intersection_size: int | None = None
        self.dp_size: int | None = None

    def round1(self) -> ProtocolMessage:
        self._advance(Phase.SETUP, Phase.ROUND1)
        encrypted = self.group.batch_exp([h.point for h in self._hashed], self._secret)
        return self._emit(ProtocolMessage.from_elements(MessageKind.X_A, encrypted))

    def round2(
        self, y_b_sub: ProtocolMessage, x_ab_pi: ProtocolMessage
    ) -> ProtocolMessage:
        if self.phase != Phase.ROUND1:
            raise PhaseError(
                f"sender session is in phase {self.phase.name}, expected ROUND1"
            )
        self._take(y_b_sub, MessageKind.Y_B_SUB)
        self._take(x_ab_pi, MessageKind.X_AB_PI)
        y_set = self._decode_set(self.group, y_b_sub, Provenance.Y_B_SUB)
        x_set = self._decode_set(self.group, x_ab_pi, Provenance.X_AB_PERMUTED)

        y_ab = EncryptedSet(
            elements=tuple(self.group.batch_exp(list(y_set.elements), self._secret)),
            provenance=Provenance.Y_AB_SUB,
        )
        x_encodings = frozenset(e.encoding for e in x_set.elements)
        matched = [
            i for i, e in enumerate(y_ab.elements) if e.encoding in x_encodings
        ]
        matched_set = set(matched)
        unmatched = [i for i in range(len(y_ab)) if i not in matched_set]

        reported = upsample(matched, unmatched, self.params.p_a, self.params.q, self._rng)
        index_set = IndexSet(indices=tuple(sorted(reported)))

        self.y_sub_size = len(y_ab)
        self.intersection_size = len(matched)
        self.dp_size = len(index_set)
        self._advance(Phase.ROUND1, Phase.DONE)
        return self._emit(ProtocolMessage.from_indices(list(index_set.indices)))


class ReceiverSession(SessionState):
    """Holds the receiver's secret, input, and optional payloads; produces the output."""

    def __init__(
        self,
        items: list[bytes],
        params: MechanismParams,
        rng: RandomSource,
        payloads: list[float] | None = None,
        group: Group | None = None,
    ):
        super().__init__(role=Role.RECEIVER, params=params)
        self.group = group or default_group()
        self._rng = rng
        self._secret: Scalar = self.group.gen_secret(rng)
        self._hashed, self._payloads = _hash_sorted(self.group, items, payloads)
        self._start = time.perf_counter()
        self._y_sub: list[HashedItem] | None = None
        self._y_sub_payloads: list[float] | None = None

    @property
    def y_sub_items(self) -> list[bytes]:
        """Plaintexts of the retained subsample, in transmitted order."""
        if self._y_sub is None:
            raise PhaseError("subsample does not exist before round 1")
        return [h.source for h in self._y_sub]

    def round1(self) -> ProtocolMessage:
        self._advance(Phase.SETUP, Phase.ROUND1)
        kept, kept_idx = bernoulli_subsample(self._hashed, self.params.p_b, self._rng)
        self._y_sub = kept
        if self._payloads is not None:
            self._y_sub_payloads = [self._payloads[i] for i in kept_idx]
        encrypted = self.group.batch_exp([h.point for h in kept], self._secret)
        return self._emit(
            ProtocolMessage.from_elements(MessageKind.Y_B_SUB, encrypted)
        )

    def round2(self, x_a: ProtocolMessage) -> ProtocolMessage:
        if self.phase != Phase.ROUND1:
            raise PhaseError(
                f"receiver session is in phase {self.phase.name}, expected ROUND1"
            )
        self._take(x_a, MessageKind.X_A)
        x_set = self._decode_set(self.group, x_a, Provenance.X_A)
        x_ab = self.group.batch_exp(list(x_set.elements), self._secret)
        pi = uniform_permutation(len(x_ab), self._rng)
        shuffled = pi.apply(x_ab)
        self._advance(Phase.ROUND1, Phase.ROUND2)
        return self._emit(
            ProtocolMessage.from_elements(MessageKind.X_AB_PI, shuffled)
        )

    def finish(self, idx: ProtocolMessage) -> DpIntersection:
        if self.phase != Phase.ROUND2:
            raise PhaseError(
                f"receiver session is in phase {self.phase.name}, expected ROUND2"
            )
        self._take(idx, MessageKind.INDEX_SET)
        assert self._y_sub is not None
        try:
            index_set = IndexSet(indices=tuple(idx.indices()))
        except ParameterError as exc:
            self.phase = Phase.DONE
            raise ProtocolAbort(f"bad index set: {exc}") from None
        if index_set.indices and index_set.indices[-1] >= len(self._y_sub):
            self.phase = Phase.DONE
            raise ProtocolAbort(
                f"index {index_set.indices[-1]} out of range for subsample of "
                f"{len(self._y_sub)}"
            )
        elements = [self._y_sub[i].source for i in index_set.indices]
        payload_sum = None
        if self._y_sub_payloads is not None:
            payload_sum = math.fsum(self._y_sub_payloads[i] for i in index_set.indices)
        self._advance(Phase.ROUND2, Phase.DONE)
        stats = RunStats(
            sent_bytes=self.sent_bytes,
            received_bytes=self.received_bytes,
            wall_time_seconds=time.perf_counter() - self._start,
            y_sub_size=len(self._y_sub),
            dp_size=len(index_set),
        )
        return DpIntersection(elements=elements, payload_sum=payload_sum, stats=stats)


# ---------------------------------------------------------------------------
# functional face over the sessions


def setup(
    items: list[bytes],
    payloads: list[float] | None,
    role: Role | str,
    params: MechanismParams,
    rng: RandomSource,
    group: Group | None = None,
) -> SenderSession | ReceiverSession:
    """Create a session for one role; hashing, sorting, and key generation
    happen here."""
    role = Role(role)
    if role == Role.SENDER:
        if payloads is not None:
            raise ParameterError("payloads belong to the receiver")
        return SenderSession(items, params, rng, group=group)
    return ReceiverSession(items, params, rng, payloads=payloads, group=group)


def sender_round1(s: SenderSession) -> ProtocolMessage:
    return s.round1()


def receiver_round1(s: ReceiverSession) -> ProtocolMessage:
    return s.round1()


def receiver_round2(s: ReceiverSession, x_a: ProtocolMessage) -> ProtocolMessage:
    return s.round2(x_a)


def sender_round2(
    s: SenderSession, y_b_sub: ProtocolMessage, x_ab_pi: ProtocolMessage
) -> ProtocolMessage:
    return s.round2(y_b_sub, x_ab_pi)


def receiver_finish(s: ReceiverSession, idx: ProtocolMessage) -> DpIntersection:
    return s.finish(idx)


def baseline_dhpsi(
    sender_items: list[bytes],
    receiver_items: list[bytes],
    group: Group | None = None,
    rng: RandomSource | None = None,
) -> list[bytes]:
    """Plain intersection via commutative encryption, no noise.

    The receiver learns exactly the intersection, returned in the receiver's
    input order.  Serves as the correctness oracle and benchmark baseline.
    """
    group = group or default_group()
    rng = rng or RandomSource.secure()
    if len(set(sender_items)) != len(sender_items):
        raise DuplicateItemError("sender items must be deduplicated")
    if len(set(receiver_items)) != len(receiver_items):
        raise DuplicateItemError("receiver items must be deduplicated")
    sender_rng, receiver_rng = rng.spawn(2)
    a = group.gen_secret(sender_rng)
    b = group.gen_secret(receiver_rng)

    x_a = group.batch_exp([h.point for h in group.hash_items(sender_items)], a)
    y_b = group.batch_exp([h.point for h in group.hash_items(receiver_items)], b)
    y_ab = group.batch_exp(y_b, a)    # computed by the sender
    x_ab = group.batch_exp(x_a, b)    # computed by the receiver
    x_ab_encodings = frozenset(e.encoding for e in x_ab)
    return [
        item for item, e in zip(receiver_items, y_ab) if e.encoding in x_ab_encodings
    ]
