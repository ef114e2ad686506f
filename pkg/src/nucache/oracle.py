"""Brute-force checks for the delivery scheme.

Entropies of linear maps of uniformly random subfiles reduce to ranks:
``H(A W | B W) = rank([A; B]) - rank(B)`` in subfile units.  Every map
here acts on the ``2 S`` subfiles of both files, file 1 first.
"""

from __future__ import annotations

import itertools
import time
from typing import Iterable, Optional, Sequence

import numpy as np

from .combinatorics import chain_count, chain_positions
from .delivery import (
    DeliveryMessage,
    DescriptionLayout,
    decode,
    describe,
    description_length,
    encode_delivery,
    outsider_unknowns,
    requesters,
    unknown_columns,
)
from .field import DEFAULT_PRIME, SingularSystemError, rank
from .placement import PlacementConfig, place, random_files
from .rates import miss_ratio


def linear_entropy(A: np.ndarray, B: Optional[np.ndarray], p: int) -> int:
    """Conditional entropy of ``A W`` given ``B W`` for uniform ``W``."""
    A = np.asarray(A, dtype=np.int64)
    if B is None or np.asarray(B).size == 0:
        return rank(A, p)
    B = np.asarray(B, dtype=np.int64)
    if A.ndim != 2 or B.ndim != 2 or A.shape[1] != B.shape[1]:
        raise ValueError(f"maps act on different variables: {A.shape} vs {B.shape}")
    return rank(np.vstack([A, B]), p) - rank(B, p)


def _unit_rows(cols: Iterable[int], n: int) -> np.ndarray:
    cols = list(cols)
    out = np.zeros((len(cols), n), dtype=np.int64)
    out[np.arange(len(cols)), cols] = 1
    return out


def file_map(i: int, S: int) -> np.ndarray:
    return _unit_rows(range((i - 1) * S, i * S), 2 * S)


def cache_map(K: int, r: tuple[int, int], users: Sequence[int]) -> np.ndarray:
    """Rows selecting every subfile cached by any of ``users``."""
    cfg = PlacementConfig(K, r, L=1)
    cm = place(cfg, None)
    pos = chain_positions(K, r)
    S = cfg.S
    cols = sorted({(f - 1) * S + pos[c] for u in users for f, c in cm.user(u).entries})
    return _unit_rows(cols, 2 * S)


def description_map(layout: DescriptionLayout) -> np.ndarray:
    K, r = layout.K, layout.r
    S = chain_count(K, r)
    pos = chain_positions(K, r)
    rows = []
    base = (layout.file - 1) * S
    for g in layout.groups:
        block = np.zeros((g.theta, 2 * S), dtype=np.int64)
        for j, c in enumerate(g.constituents):
            block[:, base + pos[c]] = g.matrix[:, j]
        rows.append(block)
    if not rows:
        return np.zeros((0, 2 * S), dtype=np.int64)
    return np.vstack(rows)


def _check(name: str, expected: int, got: int, **where) -> dict:
    return {"identity": name, "expected": expected, "got": got, "ok": expected == got, **where}


def verify_entropy_identities(K: int, r: Sequence[int], demand: Sequence[int], p: int = DEFAULT_PRIME) -> dict:
    """Rank-based check of the description and cache entropy identities."""
    r = tuple(r)
    demand = tuple(demand)
    S = chain_count(K, r)
    checks = []
    caches = {u: cache_map(K, r, [u]) for u in range(1, K + 1)}
    for i in (1, 2):
        own = requesters(demand, i)
        others = [u for u in range(1, K + 1) if u not in own]
        if not own or not others:
            raise ValueError("the identities need both files requested")
        layout = describe(i, demand, K, r, p)
        D = description_map(layout)
        W = file_map(i, S)
        a = int(S * miss_ratio(K, 1, r[i - 1]))
        b = int(S * miss_ratio(K, 2, r[i - 1]))
        for j in own:
            h = linear_entropy(W, np.vstack([D, caches[j]]), p)
            checks.append(_check("file given description and cache", 0, h, file=i, user=j))
        h = max(linear_entropy(D, caches[m], p) for m in own)
        checks.append(_check("description unknown to requesters", a, h, file=i))
        h = max(linear_entropy(D, caches[l], p) for l in others)
        checks.append(_check("description unknown to outsiders", b, h, file=i))
        for m in range(1, K + 1):
            h = linear_entropy(W, caches[m], p)
            checks.append(_check("file unknown to one user", a, h, file=i, user=m))
        for l, m in itertools.combinations(range(1, K + 1), 2):
            h = linear_entropy(W, cache_map(K, r, [l, m]), p)
            checks.append(_check("file unknown to two users", b, h, file=i, users=[l, m]))
        checks.append(_check("description length", description_length(K, r, i), layout.length, file=i))
        checks.append(
            _check("outsider unknowns", outsider_unknowns(K, r, i), _outsider_count(layout, others), file=i)
        )
    failed = [c for c in checks if not c["ok"]]
    return {"K": K, "r": list(r), "demand": list(demand), "ok": not failed, "checks": len(checks), "failures": failed}


def _outsider_count(layout: DescriptionLayout, others: Sequence[int]) -> int:
    # elements an outsider cannot rebuild from its cache, worst case over outsiders
    level = layout.file - 1
    return max(sum(g.theta for g in layout.groups if u not in g.key[level]) for u in others)


def tightness(msg: DeliveryMessage) -> dict:
    """Dropping any one outer row must leave some user underdetermined."""
    C = msg.outer_matrix()
    unknown = {u: unknown_columns(u, msg) for u in range(1, msg.K + 1)}
    worst = max(len(v) for v in unknown.values())
    report = {"rows": msg.n_rows, "max_unknowns": worst, "vacuous": msg.n_rows == 0}
    if msg.n_rows == 0:
        report["ok"] = worst == 0
        return report
    short = C[:-1]
    failing = [u for u, cols in unknown.items() if rank(short[:, cols], msg.p) < len(cols)]
    report["failing_users"] = failing
    report["ok"] = worst == msg.n_rows and bool(failing)
    return report


def demand_vectors(K: int) -> list[tuple[int, ...]]:
    return list(itertools.product((1, 2), repeat=K))


def profiles(K: int) -> list[tuple[int, int]]:
    return [(r1, r2) for r1 in range(K + 1) for r2 in range(r1 + 1)]


def exhaustive_decode(
    K_max: int,
    seeds: Sequence[int] = (0, 1, 2),
    L: int = 2,
    p: int = DEFAULT_PRIME,
    K_min: int = 1,
) -> dict:
    """Decode every user for every profile, demand and seed up to ``K_max`` users."""
    if K_max > 6:
        raise ValueError("exhaustive sweeps are limited to six users")
    start = time.perf_counter()
    instances = decodes = 0
    failures = []
    tight_fail = []
    for K in range(K_min, K_max + 1):
        for r in profiles(K):
            cfg = PlacementConfig(K, r, L, p)
            for seed in seeds:
                files = random_files(cfg, seed)
                cm = place(cfg, files, seed=seed)
                for d in demand_vectors(K):
                    msg = encode_delivery(d, files, cfg)
                    instances += 1
                    if seed == seeds[0]:
                        t = tightness(msg)
                        if not t["ok"]:
                            tight_fail.append({"K": K, "r": list(r), "demand": list(d), **t})
                    for u in range(1, K + 1):
                        decodes += 1
                        try:
                            got = decode(u, cm.user(u), msg)
                            ok = np.array_equal(got, files[d[u - 1] - 1])
                            err = None if ok else "wrong output"
                        except (SingularSystemError, ArithmeticError) as exc:
                            ok, err = False, str(exc)
                        if not ok:
                            failures.append(
                                {"K": K, "r": list(r), "demand": list(d), "user": u, "seed": seed, "error": err}
                            )
    return {
        "K_max": K_max,
        "seeds": list(seeds),
        "subfile_len": L,
        "p": p,
        "instances": instances,
        "decodes": decodes,
        "ok": not failures and not tight_fail,
        "failures": failures,
        "tightness_failures": tight_fail,
        "seconds": round(time.perf_counter() - start, 3),
    }


def entropy_sweep(K_max: int, p: int = DEFAULT_PRIME) -> dict:
    """:func:`verify_entropy_identities` over every profile and two-sided demand up to ``K_max``."""
    start = time.perf_counter()
    failures = []
    count = 0
    for K in range(2, K_max + 1):
        for r in profiles(K):
            for d in demand_vectors(K):
                if len(set(d)) < 2:
                    continue
                rep = verify_entropy_identities(K, r, d, p)
                count += 1
                if not rep["ok"]:
                    failures.append(rep)
    return {
        "K_max": K_max,
        "instances": count,
        "ok": not failures,
        "failures": failures,
        "seconds": round(time.perf_counter() - start, 3),
    }
