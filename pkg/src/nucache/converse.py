"""Lower bound on the expected rate of any uncoded placement, for ``N`` files.

For an allocation ``t`` (``sum t = M K``) and a set of requested files,
each ordering ``pi`` of that set gives a bound ``R_pi(t, set)`` built from
the per-position profiles ``c_{n,i} = C(K-i, n) / C(K, n)``.  The bound at
``t`` averages ``max_pi R_pi`` over the demand distribution, and the
converse is its minimum over the allocation simplex.

Every ``g_i`` (the floor interpolation of ``c_{., i}``) is convex, so the
objective is convex piecewise linear.  Two files are minimized exactly by
enumerating kinks on the constraint line; more files go through an
epigraph linear program whose answer is snapped to rationals and
re-evaluated exactly.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, permutations
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linprog

from .combinatorics import binom
from .rates import Number, as_fraction, interp

log = logging.getLogger(__name__)

FileSet = tuple[int, ...]


def check_probabilities(p: Sequence[Number]) -> tuple[Fraction, ...]:
    p = tuple(as_fraction(x) for x in p)
    if any(x < 0 for x in p):
        raise ValueError(f"negative probability in {p}")
    if sum(p) != 1:
        raise ValueError(f"probabilities sum to {sum(p)}, not 1")
    return p


def nonempty_subsets(N: int) -> list[FileSet]:
    return [s for k in range(1, N + 1) for s in combinations(range(1, N + 1), k)]


def range_probability(subset: Sequence[int], p: Sequence[Number], K: int) -> Fraction:
    """Probability that the set of distinct requested files is exactly ``subset``."""
    p = tuple(as_fraction(x) for x in p)
    subset = tuple(sorted(set(subset)))
    total = Fraction(0)
    for k in range(len(subset) + 1):
        sign = -1 if (len(subset) - k) % 2 else 1
        for A in combinations(subset, k):
            total += sign * sum((p[i - 1] for i in A), Fraction(0)) ** K
    return total


@lru_cache(maxsize=4096)
def c_term(K: int, n: int, i: int) -> Fraction:
    """``C(K-i, n) / C(K, n)``."""
    return Fraction(binom(K - i, n), binom(K, n))


def g(K: int, i: int, x: Fraction) -> Fraction:
    """Floor interpolation of ``c_{., i}`` at ``x``."""
    return interp(lambda n: c_term(K, n, i), x)


def profile_slopes(K: int, i: int) -> list[Fraction]:
    """Slopes of the consecutive linear pieces of ``g_i`` on ``[0, K]``."""
    return [c_term(K, n + 1, i) - c_term(K, n, i) for n in range(K)]


def profile_is_convex(K: int, i: int) -> bool:
    s = profile_slopes(K, i)
    return all(a <= b for a, b in zip(s, s[1:]))


def check_allocation(t: Sequence[Number], K: int) -> tuple[Fraction, ...]:
    t = tuple(as_fraction(x) for x in t)
    if any(not 0 <= x <= K for x in t):
        raise ValueError(f"allocation {t} leaves [0, {K}]")
    return t


def r_pi(t: Sequence[Number], subset: Sequence[int], pi: Sequence[int], K: int) -> Fraction:
    """``sum_i g_i(t_{pi(i)})`` for an ordering ``pi`` of ``subset``.

    ``pi[i-1]`` is the file placed at position ``i``.
    """
    t = check_allocation(t, K)
    if sorted(pi) != sorted(set(subset)) or len(pi) != len(set(subset)):
        raise ValueError(f"{tuple(pi)} is not an ordering of {tuple(subset)}")
    return sum((g(K, i, t[f - 1]) for i, f in enumerate(pi, start=1)), Fraction(0))


def best_orderings(t: Sequence[Fraction], subset: FileSet, K: int) -> tuple[Fraction, list[tuple[int, ...]]]:
    vals = {pi: r_pi(t, subset, pi, K) for pi in permutations(subset)}
    top = max(vals.values())
    return top, [pi for pi, v in vals.items() if v == top]


def converse_at(t: Sequence[Number], p: Sequence[Number], K: int) -> Fraction:
    """The converse objective at a fixed allocation ``t``."""
    t = check_allocation(t, K)
    p = check_probabilities(p)
    if len(t) != len(p):
        raise ValueError(f"{len(t)} allocations for {len(p)} files")
    total = Fraction(0)
    for s in nonempty_subsets(len(p)):
        prob = range_probability(s, p, K)
        if prob:
            total += prob * best_orderings(t, s, K)[0]
    return total


@dataclass
class ConverseResult:
    value: Fraction
    t: tuple[Fraction, ...]
    method: str
    lp_value: Optional[float] = None
    gap: Optional[float] = None
    certified: bool = True
    ties: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        out = {
            "value": str(self.value),
            "value_float": float(self.value),
            "t": [str(x) for x in self.t],
            "method": self.method,
            "certified": self.certified,
            "ties": self.ties,
        }
        if self.lp_value is not None:
            out["lp_value"] = self.lp_value
            out["gap"] = self.gap
        return out


def _tie_report(t: Sequence[Fraction], p: Sequence[Fraction], K: int) -> list[dict]:
    out = []
    for s in nonempty_subsets(len(p)):
        if len(s) < 2 or not range_probability(s, p, K):
            continue
        _, best = best_orderings(t, s, K)
        if len(best) > 1:
            out.append({"files": list(s), "orderings": [list(pi) for pi in best]})
    return out


def _line_candidates(K: int, total: Fraction) -> list[Fraction]:
    lo, hi = max(Fraction(0), total - K), min(Fraction(K), total)
    pts = {lo, hi}
    for n in range(math.floor(lo), math.ceil(hi) + 1):
        for x in (Fraction(n), total - n):
            if lo <= x <= hi:
                pts.add(x)
    return sorted(pts)


def _two_file_bound(K: int, p: tuple[Fraction, Fraction], M: Fraction) -> ConverseResult:
    total = M * K
    knots = _line_candidates(K, total)

    def diff(x: Fraction) -> Fraction:
        t = (x, total - x)
        return r_pi(t, (1, 2), (1, 2), K) - r_pi(t, (1, 2), (2, 1), K)

    cands = set(knots)
    for a, b in zip(knots, knots[1:]):
        da, db = diff(a), diff(b)
        if da * db < 0:
            cands.add(a + (b - a) * da / (da - db))
    favour_first = p[0] >= p[1]

    def rank(x: Fraction):
        canonical = (x >= total - x) if favour_first else (x <= total - x)
        return converse_at((x, total - x), p, K), not canonical, x

    best = min(cands, key=rank)
    t = (best, total - best)
    return ConverseResult(rank(best)[0], t, "exact-line", ties=_tie_report(t, p, K))


def _lp_bound(K: int, p: tuple[Fraction, ...], M: Fraction) -> ConverseResult:
    N = len(p)
    subsets = [s for s in nonempty_subsets(N) if range_probability(s, p, K)]
    probs = [float(range_probability(s, p, K)) for s in subsets]
    # variables: t_j (N), y_{i,j} (N*N), z_s (len(subsets))
    n_t, n_y = N, N * N
    nvar = n_t + n_y + len(subsets)
    yi = lambda i, j: n_t + (i - 1) * N + (j - 1)  # noqa: E731
    A, b = [], []
    for i in range(1, N + 1):
        for j in range(1, N + 1):
            for n in range(K):
                c0 = float(c_term(K, n, i))
                slope = float(c_term(K, n + 1, i) - c_term(K, n, i))
                # c0 + slope (t_j - n) <= y_ij
                row = np.zeros(nvar)
                row[j - 1] = slope
                row[yi(i, j)] = -1.0
                A.append(row)
                b.append(slope * n - c0)
    for k, s in enumerate(subsets):
        for pi in permutations(s):
            row = np.zeros(nvar)
            for i, f in enumerate(pi, start=1):
                row[yi(i, f)] = 1.0
            row[n_t + n_y + k] = -1.0
            A.append(row)
            b.append(0.0)
    cost = np.zeros(nvar)
    cost[n_t + n_y :] = probs
    A_eq = np.zeros((1, nvar))
    A_eq[0, :N] = 1.0
    bounds = [(0, K)] * N + [(None, None)] * (n_y + len(subsets))
    res = linprog(
        cost, A_ub=np.array(A), b_ub=np.array(b), A_eq=A_eq, b_eq=[float(M * K)],
        bounds=bounds, method="highs",
    )
    if not res.success:
        raise ArithmeticError(f"allocation program failed: {res.message}")
    t_float = res.x[:N]
    best = None
    for den in (1, 2, 4, 6, 12, 60, 840, 10**4, 10**6, 10**9):
        t = [Fraction(x).limit_denominator(den) for x in t_float]
        t = [min(max(x, Fraction(0)), Fraction(K)) for x in t]
        # push the rounding error onto the coordinate with most slack
        err = M * K - sum(t)
        order = sorted(range(N), key=lambda j: -min(t[j], K - t[j]))
        for j in order:
            fixed = t[j] + err
            if 0 <= fixed <= K:
                t[j] = fixed
                break
        else:
            continue
        val = converse_at(t, p, K)
        if best is None or val < best[0]:
            best = (val, tuple(t))
    if best is None:
        raise ArithmeticError("could not snap the allocation to a feasible rational point")
    value, t = best
    gap = float(value) - float(res.fun)
    ties = _tie_report(t, p, K)
    if ties:
        log.info("tied orderings at the minimizer: %s", ties)
    return ConverseResult(value, t, "lp", float(res.fun), gap, gap <= 1e-9, ties)


def converse_bound(K: int, N: int, p: Sequence[Number], M: Number) -> ConverseResult:
    """Minimum of :func:`converse_at` over ``sum t = M K``, ``0 <= t <= K``."""
    p = check_probabilities(p)
    M = as_fraction(M)
    if len(p) != N:
        raise ValueError(f"{len(p)} probabilities for {N} files")
    if not 0 <= M <= N:
        raise ValueError(f"memory {M} outside [0, {N}]")
    if K < 1:
        raise ValueError("need at least one user")
    if N == 1:
        t = (M * K,)
        return ConverseResult(converse_at(t, p, K), t, "exact-line")
    if N == 2:
        return _two_file_bound(K, p, M)
    return _lp_bound(K, p, M)


def expected_distinct(p: Sequence[Number], K: int) -> Fraction:
    """Expected number of distinct requested files."""
    p = check_probabilities(p)
    return sum((1 - (1 - x) ** K for x in p), Fraction(0))
