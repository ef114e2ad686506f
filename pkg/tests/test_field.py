from itertools import combinations, permutations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nucache import field
from nucache.field import (
    InconsistentSystemError,
    SingularSystemError,
    default_prime,
    matmul,
    mds_cauchy,
    rank,
    solve,
    solve_after_drop,
)

P = 65537
SMALL = 101


def det_mod(M, p):
    # Leibniz expansion; fine for the tiny sizes used here
    n = len(M)
    total = 0
    for perm in permutations(range(n)):
        sign = 1
        for i in range(n):
            for j in range(i + 1, n):
                if perm[i] > perm[j]:
                    sign = -sign
        prod = 1
        for i in range(n):
            prod = prod * int(M[i][perm[i]]) % p
        total += sign * prod
    return total % p


def rank_by_minors(A, p):
    m, n = A.shape
    for k in range(min(m, n), 0, -1):
        for rows in combinations(range(m), k):
            for cols in combinations(range(n), k):
                if det_mod(A[np.ix_(rows, cols)], p):
                    return k
    return 0


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.data())
def test_rank_matches_minor_oracle(m, n, data):
    vals = data.draw(st.lists(st.integers(0, 6), min_size=m * n, max_size=m * n))
    A = np.array(vals, dtype=np.int64).reshape(m, n)
    # small entries over a small prime give plenty of rank-deficient cases
    assert rank(A, 7) == rank_by_minors(A, 7)


def test_rank_trivia():
    assert rank(np.zeros((3, 3), dtype=np.int64), P) == 0
    assert rank(np.eye(4, dtype=np.int64), P) == 4
    A = np.array([[1, 2, 3], [2, 4, 6]])
    assert rank(A, P) == 1
    assert rank(np.zeros((0, 5), dtype=np.int64), P) == 0


def test_cauchy_every_square_submatrix_invertible():
    C = mds_cauchy(3, 6, SMALL)
    for k in range(1, 4):
        for rows in combinations(range(3), k):
            for cols in combinations(range(6), k):
                assert det_mod(C[np.ix_(rows, cols)], SMALL) != 0


def test_cauchy_errors():
    with pytest.raises(ValueError):
        mds_cauchy(4, 3, P)
    with pytest.raises(ValueError):
        mds_cauchy(50, 60, SMALL)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(0, 3), st.integers(0, 2**31))
def test_solve_roundtrip(n, extra, seed):
    rng = np.random.default_rng(seed)
    C = mds_cauchy(n + extra, n + extra, P)[:, :n]
    x = rng.integers(0, P, size=(n, 3))
    b = matmul(C, x, P)
    assert np.array_equal(solve(C, b, P), x)


def test_solve_vector_and_errors():
    A = np.array([[2, 0], [0, 3]])
    assert list(solve(A, np.array([4, 9]), P)) == [2, 3]
    with pytest.raises(SingularSystemError):
        solve(np.array([[1, 2], [2, 4]]), np.array([1, 2]), P)
    with pytest.raises(SingularSystemError):
        solve(np.array([[1, 2]]), np.array([1]), P)
    with pytest.raises(InconsistentSystemError):
        solve(np.array([[1], [1]]), np.array([1, 2]), P)


def test_solve_after_drop():
    C = mds_cauchy(3, 5, P)
    x = np.arange(10, dtype=np.int64).reshape(5, 2) + 7
    y = matmul(C, x, P)
    known = [0, 3]
    rhs = (y - matmul(C[:, known], x[known], P)) % P
    got = solve_after_drop(C, known, rhs, P)
    assert np.array_equal(got, x[[1, 2, 4]])


def test_matmul_big_prime_falls_back_exactly():
    p = 2147483647
    A = np.full((2, 8), p - 1, dtype=np.int64)
    B = np.full((8, 1), p - 1, dtype=np.int64)
    assert matmul(A, B, p)[0, 0] == (8 * (p - 1) ** 2) % p


def test_prime_env(monkeypatch):
    monkeypatch.delenv(field.PRIME_ENV, raising=False)
    assert default_prime() == 65537
    monkeypatch.setenv(field.PRIME_ENV, "101")
    assert default_prime() == 101
    monkeypatch.setenv(field.PRIME_ENV, "100")
    with pytest.raises(ValueError):
        default_prime()
