"""Two-file delivery: aligned descriptions, outer MDS code, peeling decoder.

For a demand splitting the users into ``Omega_1`` and ``Omega_2``, file ``i``
is compressed into a description ``W*_i``.  Its subfiles are grouped by
their intersection ``(rho1, rho2)`` with the opposite set; each group is
multiplied by a ``theta x kappa`` Cauchy matrix, ``theta`` being the
number of group members a requester of ``i`` is missing.  The server then
broadcasts an outer Cauchy code over ``[W*_1; W*_2]``.

Decoding peels the two layers: first the outer system, after dropping the
description elements the user can rebuild from its cache, then one small
inner system per group of the user's own description.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Optional, Sequence

import numpy as np

from .combinatorics import (
    ChainIndex,
    GroupKey,
    binom,
    chain_count,
    chain_positions,
    check_profile,
    enumerate_chains,
    enumerate_group_keys,
    mask,
)
from .field import SingularSystemError, matmul, mds_cauchy, solve_after_drop
from .placement import PlacementConfig, UserCache, subfile

SCHEMA_VERSION = 1


def check_demand(demand: Sequence[int], K: int, N: int = 2) -> tuple[int, ...]:
    demand = tuple(int(d) for d in demand)
    if len(demand) != K:
        raise ValueError(f"demand has {len(demand)} entries for {K} users")
    if any(not 1 <= d <= N for d in demand):
        raise ValueError(f"demand {demand} names files outside 1..{N}")
    return demand


def requesters(demand: Sequence[int], file: int) -> tuple[int, ...]:
    return tuple(k for k, d in enumerate(demand, start=1) if d == file)


def requested(demand: Sequence[int]) -> frozenset[int]:
    return frozenset(demand)


def group_dims(i: int, s1: int, s2: int, K_own: int, r: Sequence[int]) -> tuple[int, int]:
    """``(kappa, theta)`` for a group of file ``i`` with ``|rho1|, |rho2| = s1, s2``.

    ``K_own`` is the number of users requesting file ``i``.
    """
    r1, r2 = r
    if K_own < 1:
        raise ValueError("group dimensions need at least one requester")
    a, b = r1 - s1, r2 - s2
    kappa = binom(K_own, b) * binom(K_own - b, a - b)
    missing = (a, b)[i - 1]
    theta = Fraction(K_own - missing, K_own) * kappa
    if theta.denominator != 1:
        raise ArithmeticError(f"non-integer theta {theta} for file {i}, s=({s1},{s2})")
    return kappa, int(theta)


def _ratio(K: int, shift: int, r: int) -> Fraction:
    return Fraction(binom(K - shift, r), binom(K, r))


def delivery_rate(K: int, r1: int, r2: int, req) -> Fraction:
    """Normalized broadcast length for the set of requested files."""
    req = frozenset(req)
    if req == {1}:
        return Fraction(K - r1, K)
    if req == {2}:
        return Fraction(K - r2, K)
    if req != {1, 2}:
        raise ValueError(f"requested set must be {{1}}, {{2}} or {{1, 2}}, got {set(req)}")
    return max(
        _ratio(K, 1, r2) + _ratio(K, 2, r1),
        _ratio(K, 1, r1) + _ratio(K, 2, r2),
    )


def description_length(K: int, r: Sequence[int], i: int) -> int:
    """Closed-form number of elements of ``W*_i`` for a two-sided demand."""
    S = chain_count(K, r)
    out = S * _ratio(K, 1, r[i - 1])
    return int(out)


def outsider_unknowns(K: int, r: Sequence[int], i: int) -> int:
    """Closed-form count of ``W*_i`` elements unknown to a non-requester."""
    S = chain_count(K, r)
    return int(S * _ratio(K, 2, r[i - 1]))


@dataclass(frozen=True)
class Group:
    file: int
    key: GroupKey
    constituents: tuple[ChainIndex, ...]
    theta: int
    matrix: np.ndarray

    @property
    def kappa(self) -> int:
        return len(self.constituents)


@dataclass(frozen=True)
class DescriptionLayout:
    """Symbol-free structure of ``W*_i``: groups, constituents and inner codes."""

    file: int
    K: int
    r: tuple[int, int]
    own: tuple[int, ...]
    opposite: tuple[int, ...]
    groups: tuple[Group, ...]
    empty: tuple[GroupKey, ...]

    @property
    def length(self) -> int:
        return sum(g.theta for g in self.groups)

    def offsets(self) -> list[int]:
        out, acc = [], 0
        for g in self.groups:
            out.append(acc)
            acc += g.theta
        return out

    def known_to(self, user: int) -> list[Group]:
        """Groups a non-requester ``user`` can rebuild entirely from its cache."""
        level = self.file - 1
        return [g for g in self.groups if user in g.key[level]]


def _constituents(key: GroupKey, own: Sequence[int], r: Sequence[int]) -> list[ChainIndex]:
    r1, r2 = r
    a, b = r1 - len(key.rho1), r2 - len(key.rho2)
    out = []
    if a < 0 or b < 0 or b > a:
        return out
    for x1 in combinations(own, a):
        for x2 in combinations(x1, b):
            chain = (tuple(sorted(key.rho1 + x1)), tuple(sorted(key.rho2 + x2)))
            out.append(((mask(x1), mask(x2)), chain))
    out.sort(key=lambda t: t[0])
    return [c for _, c in out]


@lru_cache(maxsize=512)
def describe(i: int, demand: tuple[int, ...], K: int, r: tuple[int, int], p: int) -> DescriptionLayout:
    """Layout of the description of file ``i`` for a two-sided demand."""
    r = check_profile(K, r)
    if len(r) != 2:
        raise ValueError("delivery is defined for two files only")
    demand = check_demand(demand, K)
    own = requesters(demand, i)
    opp = requesters(demand, 3 - i)
    if not own or not opp:
        raise ValueError("descriptions require both files to be requested; use the single-file path")
    groups, empty = [], []
    for key in enumerate_group_keys(opp, r):
        s1, s2 = len(key.rho1), len(key.rho2)
        kappa, theta = group_dims(i, s1, s2, len(own), r)
        cons = _constituents(key, own, r)
        if len(cons) != kappa:
            raise ArithmeticError(f"group {key} has {len(cons)} constituents, expected {kappa}")
        if theta == 0:
            empty.append(key)
            continue
        groups.append(Group(i, key, tuple(cons), theta, mds_cauchy(theta, kappa, p)))
    return DescriptionLayout(i, K, r, own, opp, tuple(groups), tuple(empty))


@dataclass
class Description:
    layout: DescriptionLayout
    values: np.ndarray  # length x L

    @property
    def file(self) -> int:
        return self.layout.file


def _gather(files: np.ndarray, cfg: PlacementConfig, file: int, chains: Sequence[ChainIndex]) -> np.ndarray:
    pos = chain_positions(cfg.K, cfg.r)
    if not chains:
        return np.zeros((0, cfg.L), dtype=np.int64)
    return np.stack([subfile(files, file, pos[c], cfg.L) for c in chains])


def build_description(i: int, demand: Sequence[int], files: np.ndarray, cfg: PlacementConfig) -> Description:
    layout = describe(i, check_demand(demand, cfg.K), cfg.K, cfg.r, cfg.p)
    parts = [matmul(g.matrix, _gather(files, cfg, i, g.constituents), cfg.p) for g in layout.groups]
    values = np.vstack(parts) if parts else np.zeros((0, cfg.L), dtype=np.int64)
    return Description(layout, values)


@dataclass
class DeliveryMessage:
    demand: tuple[int, ...]
    K: int
    r: tuple[int, int]
    L: int
    p: int
    rows: np.ndarray  # n_rows x L
    columns: list[dict]

    @property
    def two_sided(self) -> bool:
        return len(requested(self.demand)) == 2

    @property
    def n_rows(self) -> int:
        return int(self.rows.shape[0])

    @property
    def n_cols(self) -> int:
        return len(self.columns)

    @property
    def cfg(self) -> PlacementConfig:
        return PlacementConfig(self.K, self.r, self.L, self.p)

    def outer_matrix(self) -> np.ndarray:
        return mds_cauchy(self.n_rows, self.n_cols, self.p)

    def to_json(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "demand": list(self.demand),
            "K": self.K,
            "r": list(self.r),
            "L": self.L,
            "p": self.p,
            "matrix": "cauchy",
            "n_rows": self.n_rows,
            "n_cols": self.n_cols,
            "columns": self.columns,
            "rows": self.rows.tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "DeliveryMessage":
        if obj.get("schema_version", SCHEMA_VERSION) != SCHEMA_VERSION:
            raise ValueError(f"unsupported message schema {obj.get('schema_version')}")
        L = int(obj["L"])
        rows = np.asarray(obj["rows"], dtype=np.int64).reshape(-1, L)
        return cls(
            tuple(obj["demand"]),
            int(obj["K"]),
            tuple(obj["r"]),
            L,
            int(obj["p"]),
            rows,
            list(obj["columns"]),
        )


def _pair_columns(layouts: Sequence[DescriptionLayout]) -> list[dict]:
    cols = []
    for lay in layouts:
        for g in lay.groups:
            for idx in range(g.theta):
                cols.append(
                    {"file": lay.file, "rho": [list(g.key.rho1), list(g.key.rho2)], "index": idx}
                )
    return cols


def _single_columns(K: int, r: Sequence[int], file: int) -> list[dict]:
    return [
        {"file": file, "chain": [list(lvl) for lvl in c]} for c in enumerate_chains(K, r)
    ]


def encode_delivery(demand: Sequence[int], files: np.ndarray, cfg: PlacementConfig) -> DeliveryMessage:
    """Broadcast message for ``demand`` over files placed with ``cfg``."""
    if cfg.N != 2:
        raise ValueError("delivery is defined for two files only")
    demand = check_demand(demand, cfg.K)
    files = np.asarray(files, dtype=np.int64)
    if files.shape != (2, cfg.F):
        raise ValueError(f"expected files of shape {(2, cfg.F)}, got {files.shape}")
    S = cfg.S
    req = requested(demand)
    rate = delivery_rate(cfg.K, cfg.r[0], cfg.r[1], req)
    n_rows = S * rate
    if n_rows.denominator != 1:
        raise ArithmeticError(f"S*R = {n_rows} is not an integer")
    n_rows = int(n_rows)
    if len(req) == 1:
        (i,) = req
        stacked = files[i - 1].reshape(S, cfg.L)
        columns = _single_columns(cfg.K, cfg.r, i)
    else:
        descs = [build_description(i, demand, files, cfg) for i in (1, 2)]
        stacked = np.vstack([d.values for d in descs])
        columns = _pair_columns([d.layout for d in descs])
    C = mds_cauchy(n_rows, len(columns), cfg.p)
    rows = matmul(C, stacked, cfg.p)
    return DeliveryMessage(demand, cfg.K, cfg.r, cfg.L, cfg.p, rows, columns)


def _layouts(msg: DeliveryMessage) -> tuple[DescriptionLayout, DescriptionLayout]:
    return tuple(describe(i, msg.demand, msg.K, msg.r, msg.p) for i in (1, 2))


def known_columns(user: int, msg: DeliveryMessage) -> dict[int, Optional[Group]]:
    """Outer-code columns ``user`` can compute from its cache.

    Maps column index to the group it belongs to (``None`` for the
    single-file path, where the column is a cached subfile).
    """
    K, r = msg.K, msg.r
    if not msg.two_sided:
        i = msg.demand[0]
        level = i - 1
        return {
            col: None for col, c in enumerate(enumerate_chains(K, r)) if user in c[level]
        }
    d = msg.demand[user - 1]
    lay1, lay2 = _layouts(msg)
    base = 0 if d == 2 else lay1.length
    other = lay1 if d == 2 else lay2
    out: dict[int, Optional[Group]] = {}
    for g, off in zip(other.groups, other.offsets()):
        if user in g.key[other.file - 1]:
            for j in range(g.theta):
                out[base + off + j] = g
    return out


def unknown_columns(user: int, msg: DeliveryMessage) -> list[int]:
    known = known_columns(user, msg)
    return [c for c in range(msg.n_cols) if c not in known]


def decode(user: int, cache: UserCache, msg: DeliveryMessage) -> np.ndarray:
    """Recover the file requested by ``user`` from its cache and ``msg``.

    Raises:
        SingularSystemError: if a reduced system is rank deficient.
    """
    K, r, L, p = msg.K, msg.r, msg.L, msg.p
    if not 1 <= user <= K:
        raise ValueError(f"user {user} outside 1..{K}")
    want = msg.demand[user - 1]
    chains = enumerate_chains(K, r)
    pos = chain_positions(K, r)
    C = msg.outer_matrix()
    known = known_columns(user, msg)
    known_idx = sorted(known)

    if not msg.two_sided:
        kv = (
            np.stack([cache.get(want, chains[c]) for c in known_idx])
            if known_idx
            else np.zeros((0, L), dtype=np.int64)
        )
        rhs = (msg.rows - matmul(C[:, known_idx], kv, p)) % p
        solved = solve_after_drop(C, known_idx, rhs, p)
        out = np.zeros((len(chains), L), dtype=np.int64)
        out[known_idx] = kv
        unknown = [c for c in range(len(chains)) if c not in known]
        out[unknown] = solved
        return out.reshape(-1)

    # step 1: recover [W*_1; W*_2]
    kv_parts = []
    seen: set[int] = set()
    for col in known_idx:
        g = known[col]
        if id(g) in seen:
            continue
        seen.add(id(g))
        cons = np.stack([cache.get(g.file, c) for c in g.constituents])
        kv_parts.append(matmul(g.matrix, cons, p))
    kv = np.vstack(kv_parts) if kv_parts else np.zeros((0, L), dtype=np.int64)
    rhs = (msg.rows - matmul(C[:, known_idx], kv, p)) % p
    solved = solve_after_drop(C, known_idx, rhs, p)
    stacked = np.zeros((msg.n_cols, L), dtype=np.int64)
    stacked[known_idx] = kv
    stacked[[c for c in range(msg.n_cols) if c not in known]] = solved

    # step 2: per-group inner solve on the user's own description
    lay1, lay2 = _layouts(msg)
    own = lay1 if want == 1 else lay2
    base = 0 if want == 1 else lay1.length
    out = np.full((len(chains), L), -1, dtype=np.int64)
    for g, off in zip(own.groups, own.offsets()):
        coded = stacked[base + off : base + off + g.theta]
        have = [j for j, c in enumerate(g.constituents) if cache.knows(want, c)]
        if len(g.constituents) - len(have) != g.theta:
            raise SingularSystemError(
                f"user {user} misses {len(g.constituents) - len(have)} members of group "
                f"{tuple(g.key)}, inner code protects {g.theta}"
            )
        hv = (
            np.stack([cache.get(want, g.constituents[j]) for j in have])
            if have
            else np.zeros((0, L), dtype=np.int64)
        )
        rhs = (coded - matmul(g.matrix[:, have], hv, p)) % p
        vals = solve_after_drop(g.matrix, have, rhs, p)
        missing = [j for j in range(g.kappa) if j not in set(have)]
        for j, v in zip(missing, vals):
            out[pos[g.constituents[j]]] = v
    for f, c in cache.entries:
        if f == want:
            out[pos[c]] = cache.get(f, c)
    if np.any(out < 0):
        raise SingularSystemError(f"user {user} left subfiles of file {want} unrecovered")
    return out.reshape(-1)
