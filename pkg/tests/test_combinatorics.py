from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nucache.combinatorics import (
    binom,
    chain_count,
    chain_positions,
    chain_rank,
    chain_unrank,
    enumerate_chains,
    enumerate_group_keys,
    multinomial,
    profile_parts,
)


def brute_chains(K, r):
    # every nested chain, built level by level from plain subsets
    out = [()]
    for size in r:
        nxt = []
        for prefix in out:
            base = prefix[-1] if prefix else tuple(range(1, K + 1))
            for s in combinations(base, size):
                nxt.append(prefix + (s,))
        out = nxt
    return sorted(out)


def profiles(K, N):
    def rec(hi, n):
        if n == 0:
            yield ()
            return
        for x in range(hi + 1):
            for rest in rec(x, n - 1):
                yield (x,) + rest

    return list(rec(K, N))


def test_binom_zero_extension():
    assert binom(-1, 0) == 0
    assert binom(3, -1) == 0
    assert binom(3, 4) == 0
    assert binom(0, 0) == 1
    assert binom(5, 2) == 10


def test_multinomial():
    assert multinomial(4, [1, 1, 2]) == 12
    with pytest.raises(ValueError):
        multinomial(4, [1, 1, 1])
    with pytest.raises(ValueError):
        multinomial(1, [2, -1])


def test_profile_parts_order():
    assert profile_parts(4, (2, 1)) == [1, 1, 2]
    assert profile_parts(5, (4, 2, 1)) == [1, 1, 2, 1]


@pytest.mark.parametrize("K,r,S", [(4, (2, 1), 12), (4, (4, 4), 1), (3, (2, 0), 3), (5, (0, 0), 1)])
def test_chain_count_examples(K, r, S):
    assert chain_count(K, r) == S


def test_section_example_chain_list():
    got = enumerate_chains(4, (2, 1))
    want = [
        ((1, 2), (1,)), ((1, 2), (2,)), ((1, 3), (1,)), ((1, 3), (3,)),
        ((1, 4), (1,)), ((1, 4), (4,)), ((2, 3), (2,)), ((2, 3), (3,)),
        ((2, 4), (2,)), ((2, 4), (4,)), ((3, 4), (3,)), ((3, 4), (4,)),
    ]
    assert got == want
    assert chain_rank(got[0], 4, (2, 1)) == 0


@pytest.mark.parametrize("K", range(0, 6))
@pytest.mark.parametrize("N", [1, 2, 3])
def test_enumeration_matches_brute_force(K, N):
    for r in profiles(K, N):
        chains = enumerate_chains(K, r)
        assert chains == brute_chains(K, r)
        assert len(chains) == chain_count(K, r)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 7), st.data())
def test_rank_unrank_roundtrip(K, data):
    N = data.draw(st.integers(1, 3))
    r = tuple(sorted(data.draw(st.lists(st.integers(0, K), min_size=N, max_size=N)), reverse=True))
    chains = enumerate_chains(K, r)
    for idx in data.draw(st.lists(st.integers(0, len(chains) - 1), min_size=1, max_size=10)):
        c = chains[idx]
        assert chain_rank(c, K, r) == idx
        assert chain_unrank(idx, K, r) == c
    assert chain_positions(K, r)[chains[-1]] == len(chains) - 1


def test_rank_rejects_bad_chains():
    with pytest.raises(ValueError):
        chain_rank(((1, 2), (3,)), 4, (2, 1))
    with pytest.raises(ValueError):
        chain_rank(((2, 1), (1,)), 4, (2, 1))
    with pytest.raises(IndexError):
        chain_unrank(12, 4, (2, 1))


def test_bad_profiles():
    with pytest.raises(ValueError):
        enumerate_chains(3, (1, 2))
    with pytest.raises(ValueError):
        enumerate_chains(3, (4, 0))


def test_group_keys_small():
    keys = enumerate_group_keys([4], (2, 1))
    assert [tuple(k) for k in keys] == [((), ()), ((4,), ()), ((4,), (4,))]


def test_group_keys_count():
    keys = enumerate_group_keys([1, 2, 3], (2, 1))
    assert len(keys) == 16
    assert len(set(keys)) == 16
    want = sum(binom(3, s2) * binom(3 - s2, s1 - s2) for s1 in range(3) for s2 in range(min(s1, 1) + 1))
    assert want == 16
    assert all(set(k.rho2) <= set(k.rho1) for k in keys)
