"""Exact matrix algebra over a RingSpec.

Matrices are 2-D numpy int16 arrays of element codes.  Global operations
(multiplication, determinant) run on the product ring's tables; anything
that needs pivoting (inverse, kernel, solving) is done per local factor,
where unit pivots behave like field pivots, and reassembled by CRT.
"""

from __future__ import annotations

import numpy as np

from . import kernels
from .errors import DomainError

DET_SIZE_CAP = 12


def as_matrix(A):
    M = np.asarray(A, dtype=np.int16)
    if M.ndim != 2:
        raise DomainError("expected a 2-D matrix, got shape %r" % (M.shape,))
    return np.ascontiguousarray(M)


def matrix_from_ints(ring, rows):
    """Build a code matrix from integer entries via the canonical Z -> R map."""
    arr = np.asarray(rows, dtype=np.int64)
    if arr.ndim != 2:
        arr = arr.reshape(len(rows), -1)
    out = np.zeros(arr.shape, dtype=np.int16)
    for idx, x in np.ndenumerate(arr):
        out[idx] = ring.embed_int(int(x))
    return out


def zeros(ring, shape):
    return np.zeros(shape, dtype=np.int16)


def identity(ring, n):
    M = np.zeros((n, n), dtype=np.int16)
    for i in range(n):
        M[i, i] = ring.one
    return M


def matmul(ring, A, B):
    A = as_matrix(A)
    B = as_matrix(B)
    if A.shape[1] != B.shape[0]:
        raise DomainError("matmul shape mismatch %r x %r" % (A.shape, B.shape))
    if A.shape[1] == 0:
        return np.zeros((A.shape[0], B.shape[1]), dtype=np.int16)
    return kernels.table_matmul(A, B, ring.add_t, ring.mul_t)


def matmul_chain(ring, *mats):
    out = as_matrix(mats[0])
    for M in mats[1:]:
        out = matmul(ring, out, M)
    return out


def add_mat(ring, A, B):
    return ring.add_t[A, B]


def neg_mat(ring, A):
    return ring.neg_t[A]


def congruent(ring, T, G):
    """T^t G T."""
    return matmul_chain(ring, as_matrix(T).T, G, T)


def det(ring, A):
    """Division-free determinant (subset dynamic program), as a ring code."""
    A = as_matrix(A)
    n = A.shape[0]
    if A.shape[0] != A.shape[1]:
        raise DomainError("determinant of non-square matrix")
    if n == 0:
        return ring.one
    if n > DET_SIZE_CAP:
        raise DomainError("determinant size cap exceeded (n=%d)" % n)
    add_t, mul_t, neg_t = ring.add_t, ring.mul_t, ring.neg_t
    # dp[mask] = det of the first popcount(mask) rows on the columns in mask
    dp = np.zeros(1 << n, dtype=np.int64)
    dp[0] = ring.one
    masks_by_count = [[] for _ in range(n + 1)]
    for mask in range(1 << n):
        masks_by_count[bin(mask).count("1")].append(mask)
    for r in range(n):
        for mask in masks_by_count[r]:
            v = dp[mask]
            if v == 0:
                continue
            below = 0  # used columns left of j; inversions added = r - below
            for j in range(n):
                bit = 1 << j
                if mask & bit:
                    below += 1
                    continue
                a = A[r, j]
                if a != 0:
                    term = mul_t[v, a]
                    if (r - below) % 2:
                        term = neg_t[term]
                    nm = mask | bit
                    dp[nm] = add_t[dp[nm], term]
    return int(dp[(1 << n) - 1])


def is_invertible(ring, A):
    A = as_matrix(A)
    if A.shape[0] != A.shape[1]:
        return False
    return ring.is_unit(det(ring, A))


# ---------------------------------------------------------------------------
# per-factor elimination


def factor_rref(factor, M, ncols=None):
    """Unit-pivot RREF over one local factor.

    Pivots are restricted to the first `ncols` columns (default: all) and
    must be units; columns without a unit entry below the current row are
    skipped.  Returns (R, pivot_cols).
    """
    R = M.astype(np.int16).copy()
    m, n = R.shape
    if ncols is None:
        ncols = n
    piv = []
    r = 0
    for c in range(ncols):
        if r == m:
            break
        col = R[r:, c]
        unit_rows = np.nonzero(factor.unit_mask[col])[0]
        if unit_rows.size == 0:
            continue
        pr = r + int(unit_rows[0])
        if pr != r:
            R[[r, pr]] = R[[pr, r]]
        s = factor.inv_t[R[r, c]]
        if s != 1:
            R[r] = factor.mul_t[R[r], s]
        mask = R[:, c] != 0
        mask[r] = False
        if mask.any():
            coeffs = R[mask, c]
            R[mask] = factor.add_t[
                R[mask],
                factor.neg_t[factor.mul_t[coeffs[:, None], R[r][None, :]]],
            ]
        piv.append(c)
        r += 1
    return R, piv


def factor_kernel(factor, M):
    """Kernel basis (columns) over one local factor.

    Requires M to reduce with unit pivots until the residual is zero; the
    kernel of such a matrix is free with the usual echelon basis.
    """
    m, n = M.shape
    R, piv = factor_rref(factor, M)
    r = len(piv)
    if np.any(R[r:, :] != 0):
        raise DomainError(
            "kernel computation hit a non-unit-eliminable block in %s" % factor.name
        )
    free = [c for c in range(n) if c not in piv]
    K = np.zeros((n, len(free)), dtype=np.int16)
    for j, fc in enumerate(free):
        K[fc, j] = 1
        for row, pc in enumerate(piv):
            K[pc, j] = factor.neg_t[R[row, fc]]
    return K


def kernel(ring, A):
    """Global kernel basis (columns): per-factor kernels reassembled by CRT."""
    A = as_matrix(A)
    mats = []
    dim = None
    for i, f in enumerate(ring.factors):
        K = factor_kernel(f, ring.project_matrix(A, i))
        if dim is None:
            dim = K.shape[1]
        elif K.shape[1] != dim:
            raise DomainError(
                "kernel rank differs between factors (%d vs %d)" % (dim, K.shape[1]),
                factor=i,
            )
        mats.append(K)
    return ring.combine_matrices(mats)


def inverse(ring, A):
    """Inverse of an invertible square matrix, per factor."""
    A = as_matrix(A)
    n = A.shape[0]
    if A.shape[0] != A.shape[1]:
        raise DomainError("inverse of non-square matrix")
    if n == 0:
        return A.copy()
    parts = []
    for i, f in enumerate(ring.factors):
        Ai = ring.project_matrix(A, i)
        aug = np.concatenate([Ai, identity_factor(f, n)], axis=1)
        R, piv = factor_rref(f, aug, ncols=n)
        if len(piv) != n:
            raise DomainError(
                "matrix not invertible over factor %d (%s)" % (i, f.name), factor=i
            )
        parts.append(R[:, n:].copy())
    return ring.combine_matrices(parts)


def identity_factor(factor, n):
    M = np.zeros((n, n), dtype=np.int16)
    one = factor.embed_int(1)
    for i in range(n):
        M[i, i] = one
    return M


def solve_columns(ring, A, B):
    """Solve A @ Y = B for Y, where A's columns are a basis of a free summand."""
    A = as_matrix(A)
    B = as_matrix(B)
    n, k = A.shape
    if B.shape[0] != n:
        raise DomainError("solve shape mismatch")
    parts = []
    for i, f in enumerate(ring.factors):
        aug = np.concatenate(
            [ring.project_matrix(A, i), ring.project_matrix(B, i)], axis=1
        )
        R, piv = factor_rref(f, aug, ncols=k)
        if len(piv) != k or piv != list(range(k)):
            raise DomainError(
                "solve: coefficient matrix is not a free basis over factor %d" % i,
                factor=i,
            )
        if np.any(R[k:, k:] != 0):
            raise DomainError("solve: inconsistent system over factor %d" % i, factor=i)
        parts.append(R[:k, k:].copy())
    return ring.combine_matrices(parts)
