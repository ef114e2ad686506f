"""Optimal two-file cache allocation and the two grouping baselines.

Along the line ``t1 + t2 = K M`` (with ``t1 >= t2``) the expected rate is
convex piecewise linear with kinks only where ``t1`` or ``t2`` is an
integer, plus the diagonal end ``t1 = t2``.  Its right slope at a kink is
``P12 * m_plus - (p1^K - p2^K) / K``, so the optimum is the first kink
whose combinatorial slope ``m_plus`` reaches the threshold; a binary
search over the sorted kinks finds it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .rates import (
    Number,
    as_fraction,
    demand_class_probs,
    expected_rate,
    miss_ratio,
    uniform_pair_rate,
)

Slope = Union[Fraction, float]


@dataclass(frozen=True)
class Breakpoint:
    t1: Fraction
    t2: Fraction
    integer_t1: bool
    integer_t2: bool
    diagonal: bool


def breakpoints(K: int, M: Number) -> list[Breakpoint]:
    """Kinks of the rate curve on ``[K M / 2, min(K, K M)]``, sorted by ``t1``.

    >>> [str(b.t1) for b in breakpoints(4, Fraction(3, 4))]
    ['3/2', '2', '3']
    """
    M = as_fraction(M)
    if not 0 <= M <= 2:
        raise ValueError(f"memory {M} outside [0, 2]")
    total = K * M
    lo, hi = total / 2, min(Fraction(K), total)
    pts = {lo, hi}
    for n in range(K + 1):
        for x in (Fraction(n), total - n):
            if lo <= x <= hi:
                pts.add(x)
    out = []
    for x in sorted(pts):
        t2 = total - x
        out.append(Breakpoint(x, t2, x.denominator == 1, t2.denominator == 1, x == t2))
    return out


def _a(K: int, n: int) -> Fraction:
    return miss_ratio(K, 1, n)


def _b(K: int, n: int) -> Fraction:
    return miss_ratio(K, 2, n)


def _pieces(K: int, M: Fraction):
    # the dominating pair rate puts the one-user profile on file 1 when M <= 1
    return (_a, _b) if M <= 1 else (_b, _a)


def slope_plus(t1: Number, K: int, M: Number) -> Slope:
    """Right slope of the two-sided rate along the line; ``inf`` at the right end."""
    t1, M = as_fraction(t1), as_fraction(M)
    t2 = K * M - t1
    if t1 >= min(Fraction(K), K * M):
        return math.inf
    f, h = _pieces(K, M)
    n1, c2 = math.floor(t1), math.ceil(t2)
    return f(K, n1 + 1) - f(K, n1) + h(K, c2 - 1) - h(K, c2)


def slope_minus(t1: Number, K: int, M: Number) -> Slope:
    """Left slope, mirrored to ``-slope_plus`` on the diagonal."""
    t1, M = as_fraction(t1), as_fraction(M)
    t2 = K * M - t1
    if t1 == t2:
        sp = slope_plus(t1, K, M)
        return -sp
    f, h = _pieces(K, M)
    c1, n2 = math.ceil(t1), math.floor(t2)
    return f(K, c1) - f(K, c1 - 1) + h(K, n2) - h(K, n2 + 1)


def threshold(K: int, p1: Number) -> Slope:
    """``(p1^K - p2^K) / (K P12)``; ``inf`` when both files are never requested together."""
    q1, q2, q12 = demand_class_probs(K, p1)
    if q12 == 0:
        return math.inf if q1 != q2 else Fraction(0)
    return (q1 - q2) / (K * q12)


@dataclass(frozen=True)
class Allocation:
    t1: Fraction
    t2: Fraction
    rate: Fraction
    threshold: Slope
    swapped: bool

    @property
    def pair(self) -> tuple[Fraction, Fraction]:
        return self.t1, self.t2


def _first_reaching(K: int, p1: Fraction, M: Fraction) -> Breakpoint:
    q1, q2, q12 = demand_class_probs(K, p1)
    need = (q1 - q2) / K
    pts = breakpoints(K, M)

    def ok(bp: Breakpoint) -> bool:
        m = slope_plus(bp.t1, K, M)
        return m == math.inf or q12 * m >= need

    lo, hi = 0, len(pts) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if ok(pts[mid]):
            hi = mid
        else:
            lo = mid + 1
    return pts[lo]


def optimal_allocation(K: int, p1: Number, M: Number) -> Allocation:
    """Rate-minimizing ``(t1, t2)`` with ``t1 + t2 = K M``.

    If ``p1 < 1/2`` the labels are swapped internally; the returned pair
    is in the caller's labels, with ``swapped`` set.
    """
    p1, M = as_fraction(p1), as_fraction(M)
    if not 0 <= p1 <= 1:
        raise ValueError(f"probability {p1} outside [0, 1]")
    if K < 1:
        raise ValueError("need at least one user")
    swapped = p1 < Fraction(1, 2)
    q = 1 - p1 if swapped else p1
    bp = _first_reaching(K, q, M)
    rate = expected_rate(K, q, bp.t1, bp.t2)
    t1, t2 = (bp.t2, bp.t1) if swapped else (bp.t1, bp.t2)
    return Allocation(t1, t2, rate, threshold(K, q), swapped)


def uniform_point(K: int, p1: Number, r: int) -> Fraction:
    q1, q2, q12 = demand_class_probs(K, p1)
    return (q1 + q2) * Fraction(K - r, K) + q12 * uniform_pair_rate(K, r)


def baseline_uniform(K: int, p1: Number, M: Number) -> Fraction:
    """Both files get ``K M / 2``; convex envelope between neighbouring integer points."""
    M = as_fraction(M)
    if not 0 <= M <= 2:
        raise ValueError(f"memory {M} outside [0, 2]")
    r = K * M / 2
    n = math.floor(r)
    frac = r - n
    out = (1 - frac) * uniform_point(K, p1, n)
    if frac:
        out += frac * uniform_point(K, p1, n + 1)
    return out


def baseline_grouping(K: int, p1: Number, M: Number) -> Fraction:
    """Cache only the more popular file until it is full, then the other."""
    p1, M = as_fraction(p1), as_fraction(M)
    if not 0 <= M <= 2:
        raise ValueError(f"memory {M} outside [0, 2]")
    hi = max(p1, 1 - p1)
    lo = 1 - hi
    if M > 1:
        return (1 - hi**K) * (2 - M)
    return -(hi**K) - lo**K * (1 - M) + 2 - M


def _alloc_key(K: int, p1: Fraction, M: Fraction) -> tuple[Fraction, Fraction]:
    return optimal_allocation(K, p1, M).pair


@dataclass(frozen=True)
class RegionBoundary:
    p1: float
    gap: float
    below: tuple[Fraction, Fraction]
    above: tuple[Fraction, Fraction]


def region_boundaries(
    K: int,
    M: Number,
    lo: Number = Fraction(1, 2),
    hi: Number = Fraction(999, 1000),
    steps: int = 200,
    tol: float = 1e-6,
) -> list[RegionBoundary]:
    """Values of ``p1`` where the optimal allocation changes, by scan and bisection.

    ``gap`` is ``|p1 - p2| = 2 p1 - 1``.
    """
    M, lo, hi = as_fraction(M), as_fraction(lo), as_fraction(hi)
    grid = [lo + (hi - lo) * k / steps for k in range(steps + 1)]
    keys = [_alloc_key(K, x, M) for x in grid]
    out = []
    for (a, ka), (b, kb) in zip(zip(grid, keys), zip(grid[1:], keys[1:])):
        if ka == kb:
            continue
        left, right = a, b
        while right - left > tol:
            mid = (left + right) / 2
            if _alloc_key(K, mid, M) == ka:
                left = mid
            else:
                right = mid
        p = float((left + right) / 2)
        out.append(RegionBoundary(p, 2 * p - 1, ka, kb))
    return out

