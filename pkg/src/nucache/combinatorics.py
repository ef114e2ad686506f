"""Exact integer combinatorics and nested-chain indexing of subfiles.

A subfile of every file is labelled by a chain of user sets
``tau_N <= ... <= tau_1 <= {1..K}`` with ``|tau_j| = r_j``.  Chains are
represented as tuples of sorted tuples of 1-based user ids and enumerated
lexicographically by ``(tau_1, tau_2, ...)``.
"""

from __future__ import annotations

import math
from functools import lru_cache
from itertools import combinations
from typing import NamedTuple, Sequence

ChainIndex = tuple[tuple[int, ...], ...]


class GroupKey(NamedTuple):
    """A pair ``(rho1, rho2)`` with ``rho2 <= rho1`` inside an opposite-demand set."""

    rho1: tuple[int, ...]
    rho2: tuple[int, ...]


def binom(a: int, b: int) -> int:
    """Binomial coefficient, defined as 0 whenever ``b < 0`` or ``b > a``."""
    if b < 0 or b > a:
        return 0
    return math.comb(a, b)


def multinomial(a: int, parts: Sequence[int]) -> int:
    if any(x < 0 for x in parts):
        raise ValueError(f"multinomial parts must be non-negative, got {list(parts)}")
    if sum(parts) != a:
        raise ValueError(f"parts {list(parts)} do not sum to {a}")
    out = math.factorial(a)
    for x in parts:
        out //= math.factorial(x)
    return out


def check_profile(K: int, r: Sequence[int]) -> tuple[int, ...]:
    """Validate a placement profile ``K >= r_1 >= ... >= r_N >= 0``."""
    r = tuple(int(x) for x in r)
    if K < 0:
        raise ValueError(f"user count must be non-negative, got {K}")
    if not r:
        raise ValueError("profile must name at least one file")
    if r[0] > K or r[-1] < 0:
        raise ValueError(f"profile {r} out of range [0, {K}]")
    if any(a < b for a, b in zip(r, r[1:])):
        raise ValueError(f"profile {r} is not non-increasing")
    return r


def profile_parts(K: int, r: Sequence[int]) -> list[int]:
    """Block sizes ``[r_N, r_{N-1} - r_N, ..., r_1 - r_2, K - r_1]``."""
    r = check_profile(K, r)
    parts = [r[-1]]
    for j in range(len(r) - 1, 0, -1):
        parts.append(r[j - 1] - r[j])
    parts.append(K - r[0])
    return parts


def chain_count(K: int, r: Sequence[int]) -> int:
    return multinomial(K, profile_parts(K, r))


def _chains_within(pool: tuple[int, ...], r: tuple[int, ...]):
    if not r:
        yield ()
        return
    for head in combinations(pool, r[0]):
        for tail in _chains_within(head, r[1:]):
            yield (head,) + tail


@lru_cache(maxsize=256)
def _enumerate(K: int, r: tuple[int, ...]) -> tuple[ChainIndex, ...]:
    return tuple(_chains_within(tuple(range(1, K + 1)), r))


def enumerate_chains(K: int, r: Sequence[int]) -> list[ChainIndex]:
    """All nested chains for ``(K, r)`` in lexicographic order.

    >>> enumerate_chains(3, (2, 0))
    [((1, 2), ()), ((1, 3), ()), ((2, 3), ())]
    """
    return list(_enumerate(K, check_profile(K, r)))


@lru_cache(maxsize=256)
def chain_positions(K: int, r: tuple[int, ...]) -> dict[ChainIndex, int]:
    """Map chain -> rank for ``(K, r)``; cached, do not mutate."""
    return {c: i for i, c in enumerate(_enumerate(K, check_profile(K, r)))}


def _comb_rank(combo: Sequence[int], n: int) -> int:
    # lex rank of a 0-based k-subset of range(n)
    k = len(combo)
    rank, prev = 0, -1
    for i, c in enumerate(combo):
        for j in range(prev + 1, c):
            rank += binom(n - 1 - j, k - 1 - i)
        prev = c
    return rank


def _comb_unrank(rank: int, n: int, k: int) -> tuple[int, ...]:
    out = []
    j = 0
    for i in range(k):
        while True:
            block = binom(n - 1 - j, k - 1 - i)
            if rank < block:
                break
            rank -= block
            j += 1
        out.append(j)
        j += 1
    return tuple(out)


def _tail_count(r: tuple[int, ...]) -> list[int]:
    # tail[j] = number of sub-chains below level j given tau_j
    tail = [1] * len(r)
    for j in range(len(r) - 2, -1, -1):
        tail[j] = binom(r[j], r[j + 1]) * tail[j + 1]
    return tail


def chain_rank(chain: ChainIndex, K: int, r: Sequence[int]) -> int:
    """Position of ``chain`` in :func:`enumerate_chains` order."""
    r = check_profile(K, r)
    if len(chain) != len(r):
        raise ValueError(f"chain has {len(chain)} levels, profile has {len(r)}")
    tail = _tail_count(r)
    pool = tuple(range(1, K + 1))
    rank = 0
    for j, level in enumerate(chain):
        if len(level) != r[j] or list(level) != sorted(set(level)):
            raise ValueError(f"level {j + 1} of {chain} is not a sorted {r[j]}-set")
        where = {u: i for i, u in enumerate(pool)}
        try:
            local = [where[u] for u in level]
        except KeyError:
            raise ValueError(f"chain {chain} is not nested inside [1..{K}]") from None
        rank += _comb_rank(local, len(pool)) * tail[j]
        pool = tuple(level)
    return rank


def chain_unrank(idx: int, K: int, r: Sequence[int]) -> ChainIndex:
    r = check_profile(K, r)
    total = chain_count(K, r)
    if not 0 <= idx < total:
        raise IndexError(f"chain index {idx} outside [0, {total})")
    tail = _tail_count(r)
    pool = tuple(range(1, K + 1))
    out = []
    for j, size in enumerate(r):
        block, idx = divmod(idx, tail[j])
        local = _comb_unrank(block, len(pool), size)
        level = tuple(pool[i] for i in local)
        out.append(level)
        pool = level
    return tuple(out)


def subsets(pool: Sequence[int], k: int) -> list[tuple[int, ...]]:
    return list(combinations(sorted(pool), k))


def enumerate_group_keys(omega: Sequence[int], r: Sequence[int]) -> list[GroupKey]:
    """All ``(rho1, rho2)`` with ``rho2 <= rho1 <= omega``, ``|rho_i| <= r_i``.

    Ordered by ``|rho1|``, then ``rho1``, then ``|rho2|``, then ``rho2``.
    Keys whose group turns out to be empty for a given demand are still
    listed; the delivery layer decides which ones carry elements.
    """
    r1, r2 = r
    omega = sorted(omega)
    keys = []
    for s1 in range(min(r1, len(omega)) + 1):
        for rho1 in combinations(omega, s1):
            for s2 in range(min(r2, s1) + 1):
                for rho2 in combinations(rho1, s2):
                    keys.append(GroupKey(rho1, rho2))
    return keys


def mask(users: Sequence[int]) -> int:
    out = 0
    for u in users:
        out |= 1 << u
    return out
