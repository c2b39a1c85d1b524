"""Matrix permanents: the kernel behind multi-photon transfer amplitudes.

``permanent_ryser`` is the production kernel (Gray-coded Ryser, O(2^n n));
``permanent_naive`` is the factorial-cost oracle kept for cross-checks.
"""

from __future__ import annotations

from itertools import permutations

import numpy as np
from numba import njit

NAIVE_MAX_DIM = 10


def _as_square(matrix) -> np.ndarray:
    mat = np.ascontiguousarray(matrix, dtype=np.complex128)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"permanent needs a square matrix, got shape {mat.shape}")
    return mat


def permanent_naive(matrix) -> complex:
    """Sum over all permutations; oracle only, dimension capped at 10."""
    mat = _as_square(matrix)
    n = mat.shape[0]
    if n > NAIVE_MAX_DIM:
        raise ValueError(f"naive permanent capped at dimension {NAIVE_MAX_DIM}, got {n}")
    if n == 0:
        return complex(1.0)
    total = 0.0 + 0.0j
    rows = range(n)
    for perm in permutations(rows):
        prod = 1.0 + 0.0j
        for i in rows:
            prod *= mat[i, perm[i]]
        total += prod
    return complex(total)


@njit(cache=True)
def _ryser(mat):
    n = mat.shape[0]
    total = 0.0 + 0.0j
    row_sums = np.zeros(n, dtype=np.complex128)
    gray = 0
    sign = 1.0
    for k in range(1, 1 << n):
        # flipped bit = lowest set bit of k (Gray-code step)
        j = 0
        kk = k
        while kk & 1 == 0:
            kk >>= 1
            j += 1
        bit = 1 << j
        gray ^= bit
        if gray & bit:
            for i in range(n):
                row_sums[i] += mat[i, j]
        else:
            for i in range(n):
                row_sums[i] -= mat[i, j]
        sign = -sign
        prod = 1.0 + 0.0j
        for i in range(n):
            prod *= row_sums[i]
        total += sign * prod
    if n % 2 == 1:
        total = -total
    return total


def permanent_ryser(matrix) -> complex:
    """Gray-coded Ryser permanent; empty matrix returns 1 (empty product)."""
    mat = _as_square(matrix)
    if mat.shape[0] == 0:
        return complex(1.0)
    return complex(_ryser(mat))


def build_submatrix(unitary, out_occ, in_occ) -> np.ndarray:
    """n x n matrix with row i of ``unitary`` repeated out_occ[i] times and
    column j repeated in_occ[j] times, both in ascending mode order."""
    mat = np.asarray(unitary, dtype=np.complex128)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"expected a square mode matrix, got shape {mat.shape}")
    t = np.asarray(out_occ, dtype=np.int64)
    s = np.asarray(in_occ, dtype=np.int64)
    if t.shape != (mat.shape[0],) or s.shape != (mat.shape[1],):
        raise ValueError("occupation vectors must match the matrix mode count")
    if t.sum() != s.sum():
        raise ValueError(f"photon count mismatch: out {t.sum()} vs in {s.sum()}")
    rows = np.repeat(np.arange(mat.shape[0]), t)
    cols = np.repeat(np.arange(mat.shape[1]), s)
    return mat[np.ix_(rows, cols)]
