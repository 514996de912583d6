"""Randomization primitives used by the protocol.

Three building blocks: Bernoulli subsampling (the receiver drops each of its
items independently), uniform permutation (the receiver shuffles the sender's
re-encrypted set so positions carry no information), and randomized-response
upsampling (the sender keeps true matches with probability p_A and injects
non-matches with probability q).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, TypeVar

import numpy as np

from .errors import ParameterError
from .rng import RandomSource

T = TypeVar("T")


@dataclass(frozen=True)
class MechanismParams:
    """Noise levels for one protocol run.

    p_b: probability each receiver item survives subsampling, in [1/2, 1].
         Values below 1/2 are rejected because the sender-side privacy
         analysis assumes the drop rate 1 - p_b is at most 1/2.
    p_a: probability a true match is kept by the sender.
    q:   probability a non-match is injected by the sender; q <= p_a, since
         reporting non-matches more often than matches serves no purpose.
    """

    p_b: float
    p_a: float
    q: float

    def __post_init__(self):
        if not 0.5 <= self.p_b <= 1.0:
            raise ParameterError(f"p_b must be in [0.5, 1], got {self.p_b}")
        if not 0.0 <= self.p_a <= 1.0:
            raise ParameterError(f"p_a must be in [0, 1], got {self.p_a}")
        if not 0.0 <= self.q <= 1.0:
            raise ParameterError(f"q must be in [0, 1], got {self.q}")
        if self.q > self.p_a:
            raise ParameterError(f"q must not exceed p_a, got q={self.q} > p_a={self.p_a}")


@dataclass(frozen=True)
class Permutation:
    """Permutation of range(n); applying it to xs yields [xs[m] for m in mapping]."""

    mapping: tuple[int, ...]

    def __post_init__(self):
        n = len(self.mapping)
        if sorted(self.mapping) != list(range(n)):
            raise ParameterError("mapping is not a permutation of range(n)")

    def __len__(self) -> int:
        return len(self.mapping)

    def apply(self, xs: Sequence[T]) -> list[T]:
        if len(xs) != len(self.mapping):
            raise ParameterError(f"length mismatch: {len(xs)} items, permutation of {len(self.mapping)}")
        return [xs[m] for m in self.mapping]

    def inverse(self) -> "Permutation":
        inv = [0] * len(self.mapping)
        for i, m in enumerate(self.mapping):
            inv[m] = i
        return Permutation(tuple(inv))


def uniform_permutation(n: int, rng: RandomSource) -> Permutation:
    """Fresh uniform permutation of range(n)."""
    if n < 0:
        raise ParameterError("n must be non-negative")
    return Permutation(tuple(int(i) for i in rng.generator.permutation(n)))


def bernoulli_subsample(
    items: Sequence[T], p: float, rng: RandomSource
) -> tuple[list[T], list[int]]:
    """Keep each item independently with probability p.

    Returns the kept items in their original relative order together with
    their original indices.  p=1 keeps everything, p=0 keeps nothing, both
    exactly (the underlying uniform draws live in [0, 1)).
    """
    if not 0.0 <= p <= 1.0 or math.isnan(p):
        raise ParameterError(f"p must be in [0, 1], got {p}")
    mask = rng.generator.random(len(items)) < p
    kept_indices = [int(i) for i in np.flatnonzero(mask)]
    return [items[i] for i in kept_indices], kept_indices


def upsample(
    intersection: Sequence[T],
    complement: Sequence[T],
    p_a: float,
    q: float,
    rng: RandomSource,
) -> list[T]:
    """Randomized response over two disjoint pools.

    Each intersection member is kept with probability p_a; each complement
    member is injected with probability q.  Draws happen in a fixed order
    (intersection first, then complement) so seeded runs are reproducible.
    Returns kept intersection members followed by injected complement
    members, each pool in its original order.
    """
    if not 0.0 <= p_a <= 1.0:
        raise ParameterError(f"p_a must be in [0, 1], got {p_a}")
    if not 0.0 <= q <= 1.0:
        raise ParameterError(f"q must be in [0, 1], got {q}")
    overlap = set(intersection) & set(complement)
    if overlap:
        raise ParameterError(f"pools must be disjoint; {len(overlap)} shared members")
    keep = rng.generator.random(len(intersection)) < p_a
    inject = rng.generator.random(len(complement)) < q
    out = [intersection[i] for i in np.flatnonzero(keep)]
    out.extend(complement[i] for i in np.flatnonzero(inject))
    return out
