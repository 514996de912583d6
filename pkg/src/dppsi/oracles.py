"""Cardinality-view samplers and exact distributions.

The sender's view of the subsampled intersection can be generated several
ways that are provably distribution-equal: directly thinning the
intersection (alg 1), removing a uniform random subset of the receiver's
whole set and coin-flipping the overlap (alg 2), or doing the same within
the intersection only (algs 3-5).  The samplers here implement each recipe
literally, step by step, so their agreement is evidence for the analysis
rather than an artifact of shared code.  Alg 6 is the sender's randomized
response over membership bits.

For small intersections the PMFs are also computed in closed form (integer
binomial coefficients, float probabilities, compensated summation), which
pins the equivalences down to machine precision without arbitrary-precision
arithmetic.  Past the size cap binomial tail terms underflow doubles, so
larger scenarios are Monte Carlo only.

Each sim_* function performs ONE protocol-free draw.  The sample_* variants
are vectorized batch samplers for Monte Carlo work; they use independent
derivations (hypergeometric overlap, binomial thinning) rather than looping
the literal recipes.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ParameterError
from .rng import RandomSource

EXACT_REGIME_LIMIT = 64  # exact tables use integer binomials; keep them small


@dataclass(frozen=True)
class OracleScenario:
    """Receiver set size n, true intersection size, and subsampling rate."""

    n: int
    intersection_size: int
    p_b: float

    def __post_init__(self):
        if self.n < 0 or self.intersection_size < 0:
            raise ParameterError("sizes must be >= 0")
        if self.intersection_size > self.n:
            raise ParameterError(
                f"intersection_size {self.intersection_size} exceeds n {self.n}"
            )
        if not 0.5 <= self.p_b <= 1.0:
            raise ParameterError(f"p_b must be in [0.5, 1], got {self.p_b}")


@dataclass(frozen=True)
class PmfTable:
    """Probability mass function on a finite integer support."""

    support: tuple[int, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        if len(self.support) != len(self.probs):
            raise ParameterError("support and probs must have equal length")
        if list(self.support) != sorted(set(self.support)):
            raise ParameterError("support must be strictly increasing")
        if any(p < 0 for p in self.probs):
            raise ParameterError("probabilities must be >= 0")
        total = math.fsum(self.probs)
        if abs(total - 1.0) > 1e-12:
            raise ParameterError(f"probabilities sum to {total}, not 1")

    def prob(self, k: int) -> float:
        try:
            return self.probs[self.support.index(k)]
        except ValueError:
            return 0.0

    def tv_distance(self, other: "PmfTable") -> float:
        keys = sorted(set(self.support) | set(other.support))
        return 0.5 * math.fsum(abs(self.prob(k) - other.prob(k)) for k in keys)

    @classmethod
    def from_samples(cls, samples: np.ndarray | Sequence[int]) -> "PmfTable":
        values, counts = np.unique(np.asarray(samples, dtype=np.int64), return_counts=True)
        if values.size and values[0] < 0:
            raise ParameterError("samples must be non-negative")
        total = counts.sum()
        return cls(
            support=tuple(int(v) for v in values),
            probs=tuple(float(c) / total for c in counts),
        )

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["k", "prob"])
            for k, p in zip(self.support, self.probs):
                writer.writerow([k, repr(p)])


def tv_distance(a: PmfTable, b: PmfTable) -> float:
    return a.tv_distance(b)


# ---------------------------------------------------------------------------
# single-draw samplers, each following its recipe literally


def sim_alg1(scn: OracleScenario, rng: RandomSource) -> int:
    """Thin the receiver's set at rate p_b; count survivors in the intersection.

    Output law: Binomial(|I|, p_b).
    """
    kept = rng.generator.random(scn.n) < scn.p_b
    # by symmetry the intersection can be identified with the first |I| slots
    return int(np.count_nonzero(kept[: scn.intersection_size]))


def sim_alg2(scn: OracleScenario, rng: RandomSource) -> int:
    """Remove a uniform subset of size s ~ Bin(n, 2(1-p_b)) from the whole
    set, then resolve each removed intersection member with a fair coin."""
    gen = rng.generator
    s = int(gen.binomial(scn.n, 2.0 * (1.0 - scn.p_b)))
    removed = gen.choice(scn.n, size=s, replace=False)
    hit = int(np.count_nonzero(removed < scn.intersection_size))
    return (scn.intersection_size - hit) + int(gen.binomial(hit, 0.5))


def sim_alg3(scn: OracleScenario, rng: RandomSource) -> int:
    """As sim_alg2 but the removal set is drawn inside the intersection."""
    gen = rng.generator
    size_i = scn.intersection_size
    s1 = int(gen.binomial(size_i, 2.0 * (1.0 - scn.p_b)))
    t1 = gen.choice(size_i, size=s1, replace=False)  # drawn per the recipe
    return (size_i - len(t1)) + int(gen.binomial(len(t1), 0.5))


def sim_alg4(intersection_size: int, t1_size: int, rng: RandomSource) -> int:
    """Fixed removed-subset size: untouched members plus fair coins."""
    if not 0 <= t1_size <= intersection_size:
        raise ParameterError("t1_size must be in [0, intersection_size]")
    return (intersection_size - t1_size) + int(rng.generator.binomial(t1_size, 0.5))


def sim_alg5(intersection_size: int, s1: int, rng: RandomSource) -> int:
    """Uniform removed subset of fixed size s1, then as sim_alg4.

    The subset's identity never reaches the output, only its size; the draw
    still happens so this stays a faithful execution of the recipe.
    """
    if not 0 <= s1 <= intersection_size:
        raise ParameterError("s1 must be in [0, intersection_size]")
    t1 = rng.generator.choice(intersection_size, size=s1, replace=False)
    return (intersection_size - len(t1)) + int(rng.generator.binomial(len(t1), 0.5))


def sim_alg6(
    membership: Sequence[bool], p_a: float, q: float, rng: RandomSource
) -> list[bool]:
    """Randomized response over membership bits.

    A member position is reported with probability p_a, a non-member
    position with probability q.
    """
    if not 0.0 <= p_a <= 1.0 or not 0.0 <= q <= 1.0:
        raise ParameterError("p_a and q must be in [0, 1]")
    member = np.asarray(membership, dtype=bool)
    u = rng.generator.random(member.size)
    reported = np.where(member, u < p_a, u < q)
    return [bool(b) for b in reported]


# ---------------------------------------------------------------------------
# vectorized batch samplers (independent derivations for Monte Carlo checks)


def sample_alg1(scn: OracleScenario, rng: RandomSource, size: int) -> np.ndarray:
    return rng.generator.binomial(scn.intersection_size, scn.p_b, size=size)


def sample_alg2(scn: OracleScenario, rng: RandomSource, size: int) -> np.ndarray:
    # |removed ∩ I| given |removed| = s is hypergeometric; coins thin the hits
    gen = rng.generator
    s = gen.binomial(scn.n, 2.0 * (1.0 - scn.p_b), size=size)
    hits = gen.hypergeometric(scn.intersection_size, scn.n - scn.intersection_size, s)
    return scn.intersection_size - hits + gen.binomial(hits, 0.5)


def sample_alg3(scn: OracleScenario, rng: RandomSource, size: int) -> np.ndarray:
    gen = rng.generator
    s1 = gen.binomial(scn.intersection_size, 2.0 * (1.0 - scn.p_b), size=size)
    return scn.intersection_size - s1 + gen.binomial(s1, 0.5)


# ---------------------------------------------------------------------------
# closed-form PMFs (float coefficients, compensated summation)


def _check_exact_regime(intersection_size: int) -> None:
    if intersection_size > EXACT_REGIME_LIMIT:
        raise ParameterError(
            f"closed-form tables are limited to intersection sizes <= {EXACT_REGIME_LIMIT}, "
            f"got {intersection_size}"
        )


def _binomial_probs(m: int, p: float) -> list[float]:
    return [math.comb(m, k) * p**k * (1.0 - p) ** (m - k) for k in range(m + 1)]


def exact_pmf_alg1(scn: OracleScenario) -> PmfTable:
    """Binomial(|I|, p_b) table."""
    _check_exact_regime(scn.intersection_size)
    m = scn.intersection_size
    return PmfTable(
        support=tuple(range(m + 1)),
        probs=tuple(_binomial_probs(m, scn.p_b)),
    )


def exact_pmf_alg3(scn: OracleScenario) -> PmfTable:
    """Law of (|I| - s1) + Bin(s1, 1/2) with s1 ~ Bin(|I|, 2(1-p_b)).

    Convolution over s1 with per-bin compensated summation, so the only
    error left is in the float coefficients themselves.
    """
    _check_exact_regime(scn.intersection_size)
    m = scn.intersection_size
    removal_rate = 2.0 * (1.0 - scn.p_b)  # in [0, 1] since p_b >= 1/2
    outer = _binomial_probs(m, removal_rate)
    bins: list[list[float]] = [[] for _ in range(m + 1)]
    for s1, w in enumerate(outer):
        if w == 0.0:
            continue
        base = m - s1
        coin_scale = 0.5**s1
        for heads in range(s1 + 1):
            bins[base + heads].append(w * math.comb(s1, heads) * coin_scale)
    return PmfTable(
        support=tuple(range(m + 1)),
        probs=tuple(math.fsum(contributions) for contributions in bins),
    )
