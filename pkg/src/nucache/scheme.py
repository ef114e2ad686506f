"""Memory sharing over at most three integer allocations.

A fractional allocation ``(t1, t2)`` is written as a convex combination of
integer profiles inside its unit cell.  Each file is cut into segments of
length ``theta_j * F`` and segment ``j`` runs the integer scheme at
``Q_j``.  Because the two-file rates are affine on each triangle of the
cell, the concatenated scheme meets the interpolated rate exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .combinatorics import chain_count
from .delivery import DeliveryMessage, decode, delivery_rate, encode_delivery
from .field import DEFAULT_PRIME
from .placement import CacheMap, PlacementConfig, UserCache, place
from .rates import Number, as_fraction, check_allocation

Point = tuple[int, int]


@dataclass(frozen=True)
class SharePlan:
    K: int
    t1: Fraction
    t2: Fraction
    points: tuple[Point, ...]
    weights: tuple[Fraction, ...]
    regime: str

    def boundaries(self, F: int) -> list[int]:
        """Segment cut points ``P_0 = 0 < ... = F`` over one file."""
        out, acc = [0], Fraction(0)
        for w in self.weights:
            acc += w * F
            if acc.denominator != 1:
                raise ValueError(f"F={F} does not split into integer segments")
            out.append(int(acc))
        return out

    def to_json(self) -> dict:
        return {
            "K": self.K,
            "t": [str(self.t1), str(self.t2)],
            "regime": self.regime,
            "segments": [
                {"r": list(q), "weight": str(w)} for q, w in zip(self.points, self.weights)
            ],
        }


def share_plan(K: int, t1: Number, t2: Number) -> SharePlan:
    """Integer profiles and weights whose average is ``(t1, t2)``.

    Zero-weight points are dropped.  When both allocations share a floor
    ``n`` the cell is the diagonal one, whose usual corner ``(n, n+1)``
    would give file 2 more than file 1; the triangle
    ``(n+1, n), (n+1, n+1), (n, n)`` is used there instead.

    >>> share_plan(4, Fraction(23, 10), Fraction(6, 5)).points
    ((3, 1), (2, 2), (2, 1))
    """
    t1, t2 = as_fraction(t1), as_fraction(t2)
    check_allocation(K, t1, t2)
    n1, n2 = math.floor(t1), math.floor(t2)
    f1, f2 = t1 - n1, t2 - n2
    if n1 == n2 and f2 > 0:
        regime = "diagonal"
        pts = [(n1 + 1, n1), (n1 + 1, n1 + 1), (n1, n1)]
        ws = [f1 - f2, f2, 1 - f1]
    elif f1 + f2 >= 1:
        regime = "1"
        pts = [(n1, n2 + 1), (n1 + 1, n2), (n1 + 1, n2 + 1)]
        ws = [1 - f1, 1 - f2, f1 + f2 - 1]
    else:
        regime = "2"
        pts = [(n1 + 1, n2), (n1, n2 + 1), (n1, n2)]
        ws = [f1, f2, 1 - f1 - f2]
    active = [(q, w) for q, w in zip(pts, ws) if w]
    for q, w in active:
        if w < 0 or not 0 <= q[1] <= q[0] <= K:
            raise ArithmeticError(f"invalid share point {q} with weight {w} for t=({t1},{t2})")
    if sum(w for _, w in active) != 1:
        raise ArithmeticError("share weights do not sum to one")
    avg = tuple(sum(w * q[i] for q, w in active) for i in (0, 1))
    if avg != (t1, t2):
        raise ArithmeticError(f"share points average to {avg}, not ({t1}, {t2})")
    return SharePlan(K, t1, t2, tuple(q for q, _ in active), tuple(w for _, w in active), regime)


def minimal_file_length(plan: SharePlan, L: int = 1) -> int:
    """Smallest ``F`` making every segment a whole number of ``S_j * L`` blocks."""
    F = 1
    for q, w in zip(plan.points, plan.weights):
        block = chain_count(plan.K, q) * L
        need = w.denominator * block // math.gcd(w.numerator, w.denominator * block)
        F = math.lcm(F, need)
    return F


def segment_configs(plan: SharePlan, F: int, p: int = DEFAULT_PRIME) -> list[PlacementConfig]:
    cfgs = []
    for q, w in zip(plan.points, plan.weights):
        seg = w * F
        S = chain_count(plan.K, q)
        if seg.denominator != 1 or int(seg) % S:
            raise ValueError(
                f"file length {F} is incompatible with the plan; "
                f"minimal compatible length is {minimal_file_length(plan)}"
            )
        cfgs.append(PlacementConfig(plan.K, q, int(seg) // S, p))
    return cfgs


def _segments(plan: SharePlan, files: np.ndarray) -> list[np.ndarray]:
    files = np.asarray(files, dtype=np.int64)
    if files.ndim != 2 or files.shape[0] != 2:
        raise ValueError(f"expected a 2 x F file array, got shape {files.shape}")
    cuts = plan.boundaries(files.shape[1])
    return [files[:, a:b] for a, b in zip(cuts, cuts[1:])]


def joint_place(plan: SharePlan, files: np.ndarray, p: int = DEFAULT_PRIME) -> list[CacheMap]:
    cfgs = segment_configs(plan, np.asarray(files).shape[1], p)
    return [place(cfg, seg) for cfg, seg in zip(cfgs, _segments(plan, files))]


def joint_deliver(
    demand: Sequence[int], plan: SharePlan, files: np.ndarray, p: int = DEFAULT_PRIME
) -> list[DeliveryMessage]:
    cfgs = segment_configs(plan, np.asarray(files).shape[1], p)
    return [encode_delivery(demand, seg, cfg) for cfg, seg in zip(cfgs, _segments(plan, files))]


def joint_decode(user: int, caches: Sequence[UserCache], msgs: Sequence[DeliveryMessage]) -> np.ndarray:
    if len(caches) != len(msgs):
        raise ValueError("one cache per segment message is required")
    return np.concatenate([decode(user, c, m) for c, m in zip(caches, msgs)])


def realized_rate(msgs: Sequence[DeliveryMessage], F: int) -> Fraction:
    """Transmitted symbols over file length."""
    return Fraction(sum(m.n_rows * m.L for m in msgs), F)


def planned_rate(plan: SharePlan, req) -> Fraction:
    """Weighted integer rates of the plan for one demand class."""
    return sum(
        (w * delivery_rate(plan.K, q[0], q[1], req) for q, w in zip(plan.points, plan.weights)),
        Fraction(0),
    )


def cache_symbols(maps: Sequence[CacheMap], user: int) -> int:
    return sum(m.user(user).symbol_count(m.cfg.L) for m in maps)


def joint_to_json(msgs: Sequence[DeliveryMessage]) -> list[dict]:
    return [m.to_json() for m in msgs]


def joint_from_json(objs: Sequence[dict]) -> list[DeliveryMessage]:
    return [DeliveryMessage.from_json(o) for o in objs]

