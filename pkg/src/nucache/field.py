"""Prime-field linear algebra on numpy int64 arrays.

Matrices are plain 2-D ``np.int64`` arrays with entries in ``[0, p)``; the
prime travels alongside as an argument.  Primes are capped below 2**31 so
every single product fits in int64; dot products that could overflow fall
back to Python integers.
"""

from __future__ import annotations

import math
import os
from typing import Iterable

import numpy as np

DEFAULT_PRIME = 65537
PRIME_ENV = "NUCACHE_FIELD_PRIME"
_MAX_PRIME = 2**31


class SingularSystemError(ArithmeticError):
    """A reduced decoding system was rank deficient."""


class InconsistentSystemError(ArithmeticError):
    """An overdetermined system had rows that disagree with the solution."""


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    for d in range(3, math.isqrt(n) + 1, 2):
        if n % d == 0:
            return False
    return True


def check_prime(p: int) -> int:
    p = int(p)
    if not is_prime(p):
        raise ValueError(f"field size {p} is not prime")
    if p >= _MAX_PRIME:
        raise ValueError(f"field prime {p} must be below 2**31")
    return p


def default_prime() -> int:
    """The field prime, honouring ``NUCACHE_FIELD_PRIME`` when set."""
    raw = os.environ.get(PRIME_ENV)
    if raw is None or not raw.strip():
        return DEFAULT_PRIME
    return check_prime(int(raw))


def inv(a: int, p: int) -> int:
    a = int(a) % p
    if a == 0:
        raise ZeroDivisionError("0 has no inverse")
    return pow(a, -1, p)


def asfield(a, p: int) -> np.ndarray:
    return np.asarray(a, dtype=np.int64) % p


def matmul(A: np.ndarray, B: np.ndarray, p: int) -> np.ndarray:
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    inner = A.shape[-1]
    if inner == 0:
        return np.zeros(A.shape[:-1] + B.shape[1:], dtype=np.int64)
    if (p - 1) ** 2 * inner < 2**63:
        return (A @ B) % p
    out = (A.astype(object) @ B.astype(object)) % p
    return out.astype(np.int64)


def mds_cauchy(rows: int, cols: int, p: int) -> np.ndarray:
    """Cauchy matrix ``1 / (x_i - y_j)`` with ``x_i = i`` and ``y_j = rows + j``.

    Every square submatrix of a Cauchy matrix is nonsingular, so dropping
    any ``cols - rows`` columns leaves an invertible matrix.

    Raises:
        ValueError: if ``rows > cols`` or the ``rows + cols`` points do not
            fit in the field.
    """
    if rows < 0 or cols < 0:
        raise ValueError("matrix dimensions must be non-negative")
    if rows > cols:
        raise ValueError(f"MDS matrix needs rows <= cols, got {rows}x{cols}")
    if rows + cols > p:
        raise ValueError(f"{rows}+{cols} evaluation points do not fit in GF({p})")
    out = np.zeros((rows, cols), dtype=np.int64)
    for i in range(rows):
        for j in range(cols):
            out[i, j] = inv(i - (rows + j), p)
    return out


def _eliminate(M: np.ndarray, p: int, ncols: int) -> tuple[np.ndarray, list[int]]:
    # Gauss-Jordan on the first ncols columns; row ops span the full width.
    R = np.array(M, dtype=np.int64) % p
    m = R.shape[0]
    pivots: list[int] = []
    row = 0
    for col in range(ncols):
        if row == m:
            break
        nz = np.nonzero(R[row:, col])[0]
        if nz.size == 0:
            continue
        piv = row + int(nz[0])
        if piv != row:
            R[[row, piv]] = R[[piv, row]]
        R[row] = (R[row] * inv(R[row, col], p)) % p
        factors = R[:, col].copy()
        factors[row] = 0
        hit = np.nonzero(factors)[0]
        if hit.size:
            R[hit] = (R[hit] - np.outer(factors[hit], R[row]) % p) % p
        pivots.append(col)
        row += 1
    return R, pivots


def rank(A, p: int) -> int:
    A = np.asarray(A, dtype=np.int64)
    if A.size == 0:
        return 0
    _, pivots = _eliminate(A, p, A.shape[1])
    return len(pivots)


def solve(A: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    """Unique solution of ``A x = b`` for a full-column-rank ``A`` (m >= n).

    ``b`` may be a vector or an ``m x L`` block of right-hand sides.  Rows
    beyond the rank must agree with the solution.
    """
    A = np.asarray(A, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    vector = b.ndim == 1
    if vector:
        b = b[:, None]
    m, n = A.shape
    if b.shape[0] != m:
        raise ValueError(f"rhs has {b.shape[0]} rows, matrix has {m}")
    if n == 0:
        if np.any(b % p):
            raise InconsistentSystemError("nonzero rhs with no unknowns")
        x = np.zeros((0, b.shape[1]), dtype=np.int64)
        return x[:, 0] if vector else x
    if m < n:
        raise SingularSystemError(f"{m} equations cannot determine {n} unknowns")
    R, pivots = _eliminate(np.hstack([A % p, b % p]), p, n)
    if len(pivots) < n:
        raise SingularSystemError(f"rank {len(pivots)} < {n} unknowns")
    if np.any(R[n:, n:]):
        raise InconsistentSystemError("overdetermined rows disagree")
    x = R[:n, n:]
    return x[:, 0] if vector else x


def solve_after_drop(
    C: np.ndarray, known_cols: Iterable[int], rhs_adjusted: np.ndarray, p: int
) -> np.ndarray:
    """Solve for the columns of ``C`` not listed in ``known_cols``.

    ``rhs_adjusted`` must already have the known columns' contribution
    subtracted.  Returns one row per unknown column, in ascending column
    order.
    """
    C = np.asarray(C, dtype=np.int64)
    known = set(int(c) for c in known_cols)
    unknown = [c for c in range(C.shape[1]) if c not in known]
    return solve(C[:, unknown], rhs_adjusted, p)
