"""Shared test utilities: protocol drivers and independent formula oracles."""

from __future__ import annotations

from dataclasses import dataclass

import mpmath

from dppsi import (
    DpIntersection,
    MechanismParams,
    ProtocolMessage,
    RandomSource,
    ReceiverSession,
    SenderSession,
)


@dataclass
class ProtocolTrace:
    result: DpIntersection
    sender: SenderSession
    receiver: ReceiverSession
    messages: list[ProtocolMessage]


def drive_protocol(
    x_items,
    y_items,
    params: MechanismParams,
    group,
    seed: int,
    payloads=None,
) -> ProtocolTrace:
    """Run all four rounds in-process and keep everything for inspection."""
    sender_rng, receiver_rng = RandomSource.seeded(seed).spawn(2)
    sender = SenderSession(x_items, params, sender_rng, group=group)
    receiver = ReceiverSession(
        y_items, params, receiver_rng, payloads=payloads, group=group
    )
    x_a = sender.round1()
    y_b_sub = receiver.round1()
    x_ab_pi = receiver.round2(x_a)
    idx = sender.round2(y_b_sub, x_ab_pi)
    result = receiver.finish(idx)
    return ProtocolTrace(
        result=result,
        sender=sender,
        receiver=receiver,
        messages=[x_a, y_b_sub, x_ab_pi, idx],
    )


def planted_sets(x_size: int, y_size: int, overlap: int, tag: str):
    """Deterministic item sets with an exact planted intersection."""
    assert overlap <= min(x_size, y_size)
    common = [f"{tag}:common:{i}".encode() for i in range(overlap)]
    x = common + [f"{tag}:left:{i}".encode() for i in range(x_size - overlap)]
    y = common + [f"{tag}:right:{i}".encode() for i in range(y_size - overlap)]
    return x, y


# ---------------------------------------------------------------------------
# independent high-precision evaluations of the accountant formulas.
# Written against the displayed equations, sharing no code with the package.

mpmath.mp.dps = 50


def mp_t(size, p_b, delta_b):
    size = mpmath.mpf(size)
    p_b = mpmath.mpf(p_b)
    delta_b = mpmath.mpf(delta_b)
    return (1 - p_b) * size - mpmath.sqrt(size / 8 * mpmath.log(2 / delta_b))


def mp_receiver_epsilon(size, p_b, delta_b):
    t = mp_t(size, p_b, delta_b)
    l4 = mpmath.log(4 / mpmath.mpf(delta_b))
    return (2 * mpmath.sqrt(t * l4) + 1) / (t - mpmath.sqrt(t * l4))


def mp_lower_bound_real(p_b, delta_b):
    p_b = mpmath.mpf(p_b)
    delta_b = mpmath.mpf(delta_b)
    half_l2 = mpmath.log(2 / delta_b) / 2
    l4 = mpmath.log(4 / delta_b)
    num = (mpmath.sqrt(half_l2) + mpmath.sqrt(half_l2 + 16 * (1 - p_b) * l4)) ** 2
    return num / (16 * (1 - p_b) ** 2)


def mp_lower_bound(p_b, delta_b) -> int:
    return int(mpmath.ceil(mp_lower_bound_real(p_b, delta_b)))


def rel_err(a, b) -> float:
    a = mpmath.mpf(a)
    b = mpmath.mpf(b)
    if b == 0:
        return float(abs(a))
    return float(abs(a - b) / abs(b))
