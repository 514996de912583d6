"""Closed-form privacy and utility accounting.

Receiver side: subsampling at rate p_b amplifies privacy for the receiver's
set against the sender.  The guarantee (eps_b, delta_b) is a function of the
realized intersection size; below a threshold size there is no finite bound.

Sender side: the randomized response the sender applies to the matched
positions gives eps_a-DP for the sender's set whenever (p_a, q) lies in the
feasible region; on that region's boundary sits the utility-optimal pair.

All logarithms here are natural.  Everything is a pure function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import IntersectionTooSmallError, ParameterError


def _check_delta(delta_b: float) -> None:
    if not 0.0 < delta_b < 1.0:
        raise ParameterError(f"delta_b must be in (0, 1), got {delta_b}")


def _check_eps(eps_a: float) -> None:
    if not (eps_a >= 0.0 and math.isfinite(eps_a)):
        raise ParameterError(f"eps_a must be finite and >= 0, got {eps_a}")


def t_statistic(intersection_size: float, p_b: float, delta_b: float) -> float:
    """Concentration statistic t = (1-p_b)|I| - sqrt(|I|/8 * log(2/delta_b)).

    The subsample misses at least t intersection members with probability
    1 - delta_b/2; a larger t means more of the receiver's set stays hidden.
    """
    if not 0.5 <= p_b <= 1.0:
        raise ParameterError(f"p_b must be in [0.5, 1], got {p_b}")
    _check_delta(delta_b)
    if intersection_size < 0:
        raise ParameterError("intersection_size must be >= 0")
    return (1.0 - p_b) * intersection_size - math.sqrt(
        intersection_size / 8.0 * math.log(2.0 / delta_b)
    )


def intersection_lower_bound(p_b: float, delta_b: float) -> int:
    """Smallest intersection cardinality with any finite receiver guarantee.

    Returns ceil of the real-valued threshold
    (sqrt(log(2/d)/2) + sqrt(log(2/d)/2 + 16(1-p_b)log(4/d)))^2 / (16(1-p_b)^2);
    a finite eps_b needs a strictly larger intersection.
    """
    if not 0.5 <= p_b < 1.0:
        raise ParameterError(
            f"p_b must be in [0.5, 1) for a finite bound (no subsampling at p_b=1), got {p_b}"
        )
    _check_delta(delta_b)
    half_l2 = 0.5 * math.log(2.0 / delta_b)
    l4 = math.log(4.0 / delta_b)
    u = 1.0 - p_b
    root = math.sqrt(half_l2) + math.sqrt(half_l2 + 16.0 * u * l4)
    return math.ceil(root * root / (16.0 * u * u))


def receiver_epsilon(
    intersection_size: int | None,
    p_b: float,
    delta_b: float,
    a_priori: bool = False,
) -> float:
    """(eps_b, delta_b)-DP level of the receiver's set for a protocol run.

    Default form evaluates at the realized intersection size, which must
    exceed intersection_lower_bound(p_b, delta_b).  With a_priori=True the
    realized size is ignored and the bound is evaluated at the threshold
    itself: the result then holds for any run whose intersection clears the
    threshold, at the cost of being much looser.

    p_b = 1 means no subsampling, hence no amplification: returns +inf.
    """
    if not 0.5 <= p_b <= 1.0:
        raise ParameterError(f"p_b must be in [0.5, 1], got {p_b}")
    _check_delta(delta_b)
    if p_b == 1.0:
        return math.inf

    bound = intersection_lower_bound(p_b, delta_b)
    if a_priori:
        size = bound
    else:
        if intersection_size is None:
            raise ParameterError("intersection_size is required unless a_priori=True")
        size = int(intersection_size)
        if size <= bound:
            raise IntersectionTooSmallError(
                f"intersection size {size} gives no finite receiver guarantee at "
                f"p_b={p_b}, delta_b={delta_b}; need more than {bound}",
                lower_bound=bound,
            )

    t = t_statistic(size, p_b, delta_b)
    l4 = math.log(4.0 / delta_b)
    denom = t - math.sqrt(t * l4)
    if denom <= 0.0:
        # reachable only when the threshold is an exact integer
        raise IntersectionTooSmallError(
            f"intersection size {size} gives no finite receiver guarantee at "
            f"p_b={p_b}, delta_b={delta_b}; need more than {bound}",
            lower_bound=bound,
        )
    return (2.0 * math.sqrt(t * l4) + 1.0) / denom


_REGION_SLACK = 1e-9  # relative; the optimal pair sits exactly on the boundary


def validate_region(p_a: float, q: float, eps_a: float) -> bool:
    """True iff (p_a, q) gives eps_a-DP for the sender's set.

    Conditions: p_a <= e^eps * q, 1 - q <= e^eps * p_a, both in [0, 1],
    and p_a >= q.  Boundary membership is decided with a small relative
    slack so that closed-form optima are not rejected for rounding.
    """
    _check_eps(eps_a)
    if not (0.0 <= p_a <= 1.0 and 0.0 <= q <= 1.0):
        return False
    if p_a < q:
        return False
    grow = math.exp(eps_a)
    if p_a > grow * q * (1.0 + _REGION_SLACK):
        return False
    if 1.0 - q > grow * p_a * (1.0 + _REGION_SLACK):
        return False
    return True


def optimal_pq(eps_a: float) -> tuple[float, float]:
    """Utility-optimal randomized-response pair for a given eps_a.

    p_a = e^eps/(1+e^eps) computed in the overflow-safe form 1/(1+e^-eps);
    q is returned as 1 - p_a so the pair sums to 1 bit-exactly.
    """
    _check_eps(eps_a)
    p_a = 1.0 / (1.0 + math.exp(-eps_a))
    return p_a, 1.0 - p_a


@dataclass(frozen=True)
class UtilityPrediction:
    precision: float
    recall: float


def predict_utility(
    intersection_sub_size: int, complement_size: int, eps_a: float
) -> UtilityPrediction:
    """Expected precision/recall of the reported set at optimal (p_a, q).

    intersection_sub_size is the number of true matches that survived
    subsampling; complement_size is the number of subsampled receiver items
    outside the sender's set.
    """
    _check_eps(eps_a)
    if intersection_sub_size < 0 or complement_size < 0:
        raise ParameterError("sizes must be >= 0")
    if intersection_sub_size == 0 and complement_size == 0:
        raise ParameterError("at least one of the sizes must be positive")
    precision = intersection_sub_size / (
        math.exp(-eps_a) * complement_size + intersection_sub_size
    )
    recall = 1.0 / (1.0 + math.exp(-eps_a))
    return UtilityPrediction(precision=precision, recall=recall)


@dataclass(frozen=True)
class ReceiverBudget:
    eps_b: float
    delta_b: float
    intersection_size: int
    p_b: float

    @classmethod
    def compute(
        cls, intersection_size: int, p_b: float, delta_b: float, a_priori: bool = False
    ) -> "ReceiverBudget":
        eps = receiver_epsilon(intersection_size, p_b, delta_b, a_priori=a_priori)
        return cls(eps_b=eps, delta_b=delta_b, intersection_size=intersection_size, p_b=p_b)


@dataclass(frozen=True)
class SenderBudget:
    eps_a: float
    p_a: float
    q: float

    def __post_init__(self):
        if not validate_region(self.p_a, self.q, self.eps_a):
            raise ParameterError(
                f"(p_a={self.p_a}, q={self.q}) is outside the eps_a={self.eps_a} region"
            )

    @classmethod
    def optimal(cls, eps_a: float) -> "SenderBudget":
        p_a, q = optimal_pq(eps_a)
        return cls(eps_a=eps_a, p_a=p_a, q=q)


def plan_report(
    eps_a: float,
    delta_b: float,
    p_b: float,
    intersection_size: int | None = None,
) -> dict[str, float | int]:
    """Flat key-value report of every closed form for one parameter set.

    With an intersection size the receiver-side guarantee is included;
    without one only the threshold and sender-side quantities appear.
    """
    p_a, q = optimal_pq(eps_a)
    report: dict[str, float | int] = {
        "eps_a": eps_a,
        "delta_b": delta_b,
        "p_b": p_b,
        "p_a": p_a,
        "q": q,
        "expected_recall": 1.0 / (1.0 + math.exp(-eps_a)),
    }
    if p_b < 1.0:
        report["intersection_lower_bound"] = intersection_lower_bound(p_b, delta_b)
        report["eps_b_a_priori"] = receiver_epsilon(None, p_b, delta_b, a_priori=True)
    if intersection_size is not None:
        report["intersection_size"] = intersection_size
        report["expected_i_sub"] = p_b * intersection_size
        report["t"] = t_statistic(intersection_size, p_b, delta_b)
        try:
            eps_b = receiver_epsilon(intersection_size, p_b, delta_b)
        except IntersectionTooSmallError:
            eps_b = math.inf
        # a plan for an infeasible size is still a useful plan; flag it
        # instead of failing, and keep non-finite values out of the report
        if math.isfinite(eps_b):
            report["eps_b"] = eps_b
            report["receiver_guarantee_finite"] = 1
        else:
            report["receiver_guarantee_finite"] = 0
    return report


def format_report(report: dict[str, float | int]) -> str:
    width = max(len(k) for k in report)
    lines = []
    for key, value in report.items():
        shown = f"{value:.12g}" if isinstance(value, float) else str(value)
        lines.append(f"{key.ljust(width)}  {shown}")
    return "\n".join(lines)
