import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nucache.converse import (
    converse_at,
    converse_bound,
    expected_distinct,
    profile_is_convex,
    r_pi,
    range_probability,
)
from nucache.rates import expected_rate, pair_rates, pair_order

F_ = Fraction


def _c(K, n, i):
    a = math.comb(K - i, n) if 0 <= n <= K - i else 0
    return F_(a, math.comb(K, n))


def _g(K, i, x):
    n = math.floor(x)
    f = x - n
    return (1 - f) * _c(K, n, i) + (f * _c(K, n + 1, i) if f else 0)


def brute_converse_at(t, p, K):
    # sum over every demand vector, max over orderings of its distinct files
    N = len(p)
    total = F_(0)
    for d in itertools.product(range(1, N + 1), repeat=K):
        prob = math.prod((p[x - 1] for x in d), start=F_(1))
        files = sorted(set(d))
        best = max(
            sum((_g(K, i, t[f - 1]) for i, f in enumerate(pi, start=1)), F_(0))
            for pi in itertools.permutations(files)
        )
        total += prob * best
    return total


def test_range_probability_examples():
    p = (F_(4, 5), F_(1, 5))
    assert range_probability({1}, p, 4) == F_(4, 5) ** 4
    assert float(range_probability({1}, p, 4)) == pytest.approx(0.4096)
    assert range_probability({1, 2}, p, 4) == 1 - F_(4, 5) ** 4 - F_(1, 5) ** 4
    q = (F_(1, 2), F_(1, 3), F_(1, 6))
    subsets = [s for k in (1, 2, 3) for s in itertools.combinations((1, 2, 3), k)]
    assert sum(range_probability(s, q, 5) for s in subsets) == 1


def test_r_pi_examples():
    K = 5
    for t1 in range(K + 1):
        assert r_pi((t1,), (1,), (1,), K) == F_(K - t1, K)
    for r1 in range(K + 1):
        for r2 in range(r1 + 1):
            assert r_pi((r1, r2), (1, 2), (1, 2), K) == pair_rates(K, r1, r2)[0]
            assert r_pi((r1, r2), (1, 2), (2, 1), K) == pair_rates(K, r1, r2)[1]
    assert r_pi((K, K, K), (1, 2, 3), (3, 1, 2), K) == 0
    with pytest.raises(ValueError):
        r_pi((1, 1), (1, 2), (1, 1), K)


def test_converse_at_examples():
    assert converse_at((2, 1), (0.8, 0.2), 4) == F_(1987, 2500)
    assert converse_at((3, 3, 3), (0.5, 0.25, 0.25), 3) == 0


@pytest.mark.parametrize(
    "K,p,t",
    [
        (3, (F_(1, 3),) * 3, (1, 1, 1)),
        (3, (F_(1, 2), F_(1, 3), F_(1, 6)), (F_(3, 2), 1, F_(1, 2))),
        (4, (F_(3, 5), F_(1, 5), F_(1, 5)), (F_(5, 2), F_(1, 4), F_(5, 4))),
    ],
)
def test_three_files_match_brute_force(K, p, t):
    assert converse_at(t, p, K) == brute_converse_at(t, p, K)


@settings(max_examples=40, deadline=None)
@given(
    st.integers(2, 5),
    st.lists(st.integers(1, 9), min_size=3, max_size=3),
    st.lists(st.integers(0, 20), min_size=3, max_size=3),
    st.permutations([0, 1, 2]),
)
def test_joint_permutation_symmetry(K, w, tt, perm):
    p = [F_(x, sum(w)) for x in w]
    t = [F_(x, 20) * K for x in tt]
    a = converse_at(t, p, K)
    b = converse_at([t[i] for i in perm], [p[i] for i in perm], K)
    assert a == b


@pytest.mark.parametrize("K", range(2, 9))
def test_two_files_equal_achievable_pointwise(K):
    for p1 in ("0.5", "0.65", "0.9"):
        for t1 in range(K + 1):
            for t2 in range(t1 + 1):
                assert converse_at((t1, t2), (F_(p1), 1 - F_(p1)), K) == expected_rate(K, p1, t1, t2)


@pytest.mark.parametrize("K", range(3, 9))
def test_ordering_flip_matches_pair_order(K):
    for r1 in range(K + 1):
        for r2 in range(r1):
            id_ = r_pi((r1, r2), (1, 2), (1, 2), K)
            sw = r_pi((r1, r2), (1, 2), (2, 1), K)
            assert (id_ >= sw) == pair_order(K, r1, r2)[0]


@pytest.mark.parametrize("K", range(1, 13))
def test_j_convexity(K):
    assert all(profile_is_convex(K, i) for i in range(1, K + 1))


def test_zero_and_full_memory():
    p = (F_(1, 2), F_(3, 10), F_(1, 5))
    for K in (2, 3, 4):
        assert converse_bound(K, 3, p, 0).value == expected_distinct(p, K)
        assert converse_bound(K, 3, p, 3).value == 0
        assert converse_bound(K, 2, (F_(7, 10), F_(3, 10)), 0).value == expected_distinct((F_(7, 10), F_(3, 10)), K)


def _simplex_grid(N, total, K, step):
    n = int(total / step)
    for parts in itertools.product(range(n + 1), repeat=N - 1):
        last = n - sum(parts)
        if last < 0:
            continue
        t = [x * step for x in parts] + [last * step]
        if all(0 <= x <= K for x in t):
            yield t


@pytest.mark.parametrize(
    "K,p,M",
    [
        (3, (F_(1, 2), F_(3, 10), F_(1, 5)), F_(1)),
        (4, (F_(3, 5), F_(1, 4), F_(3, 20)), F_(3, 2)),
        (3, (F_(1, 3),) * 3, F_(2, 3)),
    ],
)
def test_three_file_minimum_against_grid(K, p, M):
    res = converse_bound(K, 3, p, M)
    assert res.certified
    assert sum(res.t) == M * K
    assert res.value == converse_at(res.t, p, K)
    grid = min(converse_at(t, p, K) for t in _simplex_grid(3, M * K, K, F_(1, 4)))
    assert res.value <= grid


def test_bad_inputs():
    with pytest.raises(ValueError):
        converse_bound(4, 2, (0.5, 0.4), 1)
    with pytest.raises(ValueError):
        converse_bound(4, 2, (0.5, 0.5), 3)
    with pytest.raises(ValueError):
        converse_at((5, 0), (0.5, 0.5), 4)
