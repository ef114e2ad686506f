"""Closed-form achievable delivery rates for two files, exact over rationals.

Allocations ``t_i`` are measured in users (``M_i = t_i / K``); fractional
allocations are handled by the floor interpolation of memory sharing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Union

from .combinatorics import binom

Number = Union[int, float, str, Fraction]


def as_fraction(x: Number) -> Fraction:
    """Exact rational from an int, Fraction, decimal string or float.

    Floats go through their shortest decimal repr, so ``0.8`` becomes
    ``4/5`` rather than the binary approximation.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"non-finite value {x}")
        return Fraction(repr(x))
    return Fraction(str(x).strip())


def miss_ratio(K: int, shift: int, n: int) -> Fraction:
    """``C(K-shift, n) / C(K, n)``: share of subfiles missed by ``shift`` users."""
    return Fraction(binom(K - shift, n), binom(K, n))


def interp(c: Callable[[int], Fraction], t: Fraction) -> Fraction:
    """Floor interpolation ``(1 - f) c(floor t) + f c(floor t + 1)``."""
    n = math.floor(t)
    frac = t - n
    out = (1 - frac) * c(n)
    if frac:
        out += frac * c(n + 1)
    return out


def pair_rates(K: int, r1: int, r2: int) -> tuple[Fraction, Fraction]:
    """``(R1, R2)``: broadcast lengths needed by requesters of file 1 / file 2."""
    if not 0 <= r2 <= r1 <= K:
        raise ValueError(f"need 0 <= r2 <= r1 <= K, got r=({r1},{r2}), K={K}")
    R1 = miss_ratio(K, 1, r1) + miss_ratio(K, 2, r2)
    R2 = miss_ratio(K, 2, r1) + miss_ratio(K, 1, r2)
    return R1, R2


def pair_order(K: int, r1: int, r2: int) -> tuple[bool, Fraction]:
    """Whether ``R1 >= R2``, and the gap ``R1 - R2`` in closed form."""
    if not 0 <= r2 < r1 <= K:
        raise ValueError(f"ordering needs 0 <= r2 < r1 <= K, got ({r1},{r2})")
    if K < 2:
        raise ValueError("ordering needs at least two users")
    gap = Fraction((r1 - r2) * (K - r1 - r2), K * (K - 1))
    return r1 + r2 <= K, gap


def single_rate(K: int, r: int) -> Fraction:
    return Fraction(K - r, K)


def uniform_pair_rate(K: int, r: int) -> Fraction:
    """Two-sided rate when both files get the same allocation ``r``."""
    return Fraction(binom(K, r + 1) - binom(K - 2, r + 1), binom(K, r))


def demand_class_probs(K: int, p1: Number) -> tuple[Fraction, Fraction, Fraction]:
    """``(P[only file 1], P[only file 2], P[both])``."""
    p1 = as_fraction(p1)
    if not 0 <= p1 <= 1:
        raise ValueError(f"probability {p1} outside [0, 1]")
    a, b = p1**K, (1 - p1) ** K
    return a, b, 1 - a - b


def check_allocation(K: int, t1: Fraction, t2: Fraction) -> None:
    if not 0 <= t2 <= t1 <= K:
        raise ValueError(f"need 0 <= t2 <= t1 <= K, got ({t1}, {t2}) with K={K}")


def frac_pair_rates(K: int, t1: Number, t2: Number) -> tuple[Fraction, Fraction]:
    """Interpolated ``(R1(t), R2(t))`` for fractional allocations."""
    t1, t2 = as_fraction(t1), as_fraction(t2)
    check_allocation(K, t1, t2)
    a = lambda n: miss_ratio(K, 1, n)  # noqa: E731
    b = lambda n: miss_ratio(K, 2, n)  # noqa: E731
    R1 = interp(a, t1) + interp(b, t2)
    R2 = interp(b, t1) + interp(a, t2)
    return R1, R2


def expected_rate(K: int, p1: Number, t1: Number, t2: Number) -> Fraction:
    """Expected delivery rate of the two-file scheme at allocation ``(t1, t2)``."""
    t1, t2 = as_fraction(t1), as_fraction(t2)
    q1, q2, q12 = demand_class_probs(K, p1)
    R1, R2 = frac_pair_rates(K, t1, t2)
    return q1 * (K - t1) / K + q2 * (K - t2) / K + q12 * max(R1, R2)


def direct_expectation(K: int, p1: Number, r1: int, r2: int) -> Fraction:
    """Table-driven expectation over the three demand classes, integer ``r`` only."""
    q1, q2, q12 = demand_class_probs(K, p1)
    return q1 * single_rate(K, r1) + q2 * single_rate(K, r2) + q12 * max(pair_rates(K, r1, r2))


@dataclass(frozen=True)
class RatePoint:
    t1: Fraction
    t2: Fraction
    rbar: Fraction


def rate_point(K: int, p1: Number, t1: Number, t2: Number) -> RatePoint:
    t1, t2 = as_fraction(t1), as_fraction(t2)
    return RatePoint(t1, t2, expected_rate(K, p1, t1, t2))
