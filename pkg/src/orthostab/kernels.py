"""Hot numeric kernels: table-driven ring matmul, mod-p elimination, isometry DFS.

Every kernel has a pure-numpy implementation and a numba ``@njit`` twin.
The active backend is chosen at import time by the ``ORTHOSTAB_NUMBA``
environment variable: unset or truthy selects numba (when importable),
``0``/``no``/``numpy``/``off`` forces the numpy path.  Both backends are
exposed via ``IMPLEMENTATIONS`` so tests and benchmarks can compare them.

Ring elements are integer codes into precomputed ``add``/``mul`` tables
(code 0 is the ring zero).  Prime-field kernels work on int64 arrays with
entries already reduced into ``[0, p)``.
"""

from __future__ import annotations

import os

import numpy as np

_env = os.environ.get("ORTHOSTAB_NUMBA", "1").strip().lower()
_WANT_NUMBA = _env not in ("0", "no", "numpy", "off", "false")

_HAVE_NUMBA = False
if _WANT_NUMBA:
    try:
        from numba import njit

        _HAVE_NUMBA = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        _HAVE_NUMBA = False


# ---------------------------------------------------------------------------
# numpy reference implementations


def _np_table_matmul(A, B, add_t, mul_t):
    """Ring matrix product via lookup tables.  A: (m,k), B: (k,n) codes."""
    m, k = A.shape
    k2, n = B.shape
    assert k == k2
    C = np.zeros((m, n), dtype=np.int16)
    for t in range(k):
        C = add_t[C, mul_t[A[:, t][:, None], B[t, :][None, :]]]
    return C


def _np_table_dot_rows(V, w, add_t, mul_t):
    """Ring dot product of every row of V with vector w."""
    n = w.shape[0]
    acc = np.zeros(V.shape[0], dtype=np.int16)
    for i in range(n):
        acc = add_t[acc, mul_t[V[:, i], w[i]]]
    return acc


def _np_rref_mod(A, p, inv_table):
    """In-place reduced row echelon form over Z/p. Returns (pivot_cols, rank)."""
    m, n = A.shape
    piv = []
    r = 0
    for c in range(n):
        if r == m:
            break
        col = A[r:, c]
        nz = np.nonzero(col)[0]
        if nz.size == 0:
            continue
        pr = r + nz[0]
        if pr != r:
            A[[r, pr]] = A[[pr, r]]
        s = inv_table[A[r, c]]
        if s != 1:
            A[r] = (A[r] * s) % p
        mask = A[:, c] != 0
        mask[r] = False
        if mask.any():
            A[mask] = (A[mask] - np.outer(A[mask, c], A[r])) % p
        piv.append(c)
        r += 1
    return np.asarray(piv, dtype=np.int64), r


def _np_sparse_rank(indptr, indices, values, nrows, p, inv_table, max_rank):
    """Rank of a matrix given as sparse columns, by streaming elimination.

    Pivot rows are kept in echelon form (zeros left of the leading entry),
    so each new column reduces in one forward pass.
    """
    cap = min(nrows, max_rank)
    rows = np.zeros((cap, nrows), dtype=np.int16)
    lead_of_pos = np.full(nrows, -1, dtype=np.int64)
    rank = 0
    v = np.zeros(nrows, dtype=np.int64)
    ncols = indptr.shape[0] - 1
    for cidx in range(ncols):
        lo, hi = indptr[cidx], indptr[cidx + 1]
        if lo == hi:
            continue
        v[:] = 0
        np.add.at(v, indices[lo:hi], values[lo:hi] % p)
        v %= p
        pos = int(indices[lo:hi].min())
        while pos < nrows:
            if v[pos] == 0:
                pos += 1
                continue
            ridx = lead_of_pos[pos]
            if ridx == -1:
                s = inv_table[v[pos]]
                rows[rank, :] = (v * s) % p
                lead_of_pos[pos] = rank
                rank += 1
                break
            v[pos:] = (v[pos:] - v[pos] * rows[ridx, pos:].astype(np.int64)) % p
    return rank


def _np_isometry_dfs(vecs, tgt_gram, src_gram, norms, base, add_t, mul_t, budget, out):
    """Enumerate index tuples (c_0..c_{d-1}) with B(v_ci, v_cj) = src_gram[i,j].

    `base` is the candidate list for column 0 (callers pre-filter by norm;
    splitting it across calls partitions the DFS into independent subtrees).
    Returns (status, count, work): status 0 ok, 1 budget exceeded,
    2 output capacity exceeded.
    """
    Nv, n = vecs.shape
    d = src_gram.shape[0]
    work = np.int64(Nv)
    count = 0
    dv = np.zeros((d, Nv), dtype=np.int16)
    chosen = np.zeros(d, dtype=np.int64)
    status = 0

    def rec(level, cand):
        nonlocal count, work, status
        for c in cand:
            if status:
                return
            chosen[level] = c
            if level == d - 1:
                if count >= out.shape[0]:
                    status = 2
                    return
                out[count, :] = chosen
                count += 1
                continue
            t = _np_table_dot_rows(tgt_gram, vecs[c], add_t, mul_t)
            dv[level, :] = _np_table_dot_rows(vecs, t, add_t, mul_t)
            work += Nv * (n + 1)
            if work > budget:
                status = 1
                return
            nxt = level + 1
            mask = norms == src_gram[nxt, nxt]
            for i in range(nxt):
                mask &= dv[i, :] == src_gram[i, nxt]
            rec(nxt, np.nonzero(mask)[0].astype(np.int64))

    if d > 0:
        rec(0, base)
    return status, count, int(work)


def _np_gram_norms(vecs, gram, add_t, mul_t):
    """B(v, v) for every row v of vecs."""
    Nv = vecs.shape[0]
    n = gram.shape[0]
    out = np.zeros(Nv, dtype=np.int16)
    for i in range(n):
        ti = np.zeros(Nv, dtype=np.int16)
        for j in range(n):
            ti = add_t[ti, mul_t[vecs[:, j], gram[i, j]]]
        out = add_t[out, mul_t[vecs[:, i], ti]]
    return out


_NUMPY_IMPLS = {
    "table_matmul": _np_table_matmul,
    "table_dot_rows": _np_table_dot_rows,
    "rref_mod": _np_rref_mod,
    "sparse_rank": _np_sparse_rank,
    "isometry_dfs": _np_isometry_dfs,
    "gram_norms": _np_gram_norms,
}


# ---------------------------------------------------------------------------
# numba twins

if _HAVE_NUMBA:

    @njit(cache=True, nogil=True)
    def _nb_table_matmul(A, B, add_t, mul_t):
        m, k = A.shape
        n = B.shape[1]
        C = np.zeros((m, n), dtype=np.int16)
        for i in range(m):
            for j in range(n):
                acc = np.int16(0)
                for t in range(k):
                    acc = add_t[acc, mul_t[A[i, t], B[t, j]]]
                C[i, j] = acc
        return C

    @njit(cache=True, nogil=True)
    def _nb_table_dot_rows(V, w, add_t, mul_t):
        Nv, n = V.shape
        out = np.zeros(Nv, dtype=np.int16)
        for v in range(Nv):
            acc = np.int16(0)
            for i in range(n):
                acc = add_t[acc, mul_t[V[v, i], w[i]]]
            out[v] = acc
        return out

    @njit(cache=True, nogil=True)
    def _nb_rref_mod(A, p, inv_table):
        m, n = A.shape
        piv = np.empty(min(m, n), dtype=np.int64)
        r = 0
        for c in range(n):
            if r == m:
                break
            pr = -1
            for i in range(r, m):
                if A[i, c] != 0:
                    pr = i
                    break
            if pr == -1:
                continue
            if pr != r:
                for j in range(n):
                    tmp = A[r, j]
                    A[r, j] = A[pr, j]
                    A[pr, j] = tmp
            s = inv_table[A[r, c]]
            if s != 1:
                for j in range(c, n):
                    A[r, j] = (A[r, j] * s) % p
            for i in range(m):
                if i != r and A[i, c] != 0:
                    f = A[i, c]
                    for j in range(c, n):
                        A[i, j] = (A[i, j] - f * A[r, j]) % p
            piv[r] = c
            r += 1
        return piv[:r], r

    @njit(cache=True, nogil=True)
    def _nb_sparse_rank(indptr, indices, values, nrows, p, inv_table, max_rank):
        cap = min(nrows, max_rank)
        rows = np.zeros((cap, nrows), dtype=np.int16)
        lead_of_pos = np.full(nrows, -1, dtype=np.int64)
        rank = 0
        v = np.zeros(nrows, dtype=np.int64)
        ncols = indptr.shape[0] - 1
        for cidx in range(ncols):
            lo = indptr[cidx]
            hi = indptr[cidx + 1]
            if lo == hi:
                continue
            first = nrows
            for t in range(lo, hi):
                pos = indices[t]
                v[pos] = (v[pos] + values[t]) % p
                if pos < first:
                    first = pos
            pos = first
            while pos < nrows:
                if v[pos] == 0:
                    pos += 1
                    continue
                ridx = lead_of_pos[pos]
                if ridx == -1:
                    s = inv_table[v[pos]]
                    for j in range(pos, nrows):
                        rows[rank, j] = (v[j] * s) % p
                    lead_of_pos[pos] = rank
                    rank += 1
                    break
                f = v[pos]
                for j in range(pos, nrows):
                    rv = rows[ridx, j]
                    if rv != 0:
                        v[j] = (v[j] - f * rv) % p
                pos += 1
            # clear the work buffer
            for j in range(first, nrows):
                v[j] = 0
        return rank

    @njit(cache=True, nogil=True)
    def _nb_isometry_dfs(vecs, tgt_gram, src_gram, norms, base, add_t, mul_t, budget, out):
        Nv, n = vecs.shape
        d = src_gram.shape[0]
        dv = np.zeros((d, Nv), dtype=np.int16)
        cand = np.zeros((d, Nv), dtype=np.int64)
        clen = np.zeros(d, dtype=np.int64)
        cpos = np.zeros(d, dtype=np.int64)
        chosen = np.zeros(d, dtype=np.int64)
        work = np.int64(Nv)
        for i in range(base.shape[0]):
            cand[0, i] = base[i]
        clen[0] = base.shape[0]
        cpos[0] = 0
        count = 0
        status = 0
        level = 0
        t = np.zeros(n, dtype=np.int16)
        while level >= 0:
            if work > budget:
                status = 1
                break
            if cpos[level] >= clen[level]:
                level -= 1
                if level >= 0:
                    cpos[level] += 1
                continue
            c = cand[level, cpos[level]]
            chosen[level] = c
            if level == d - 1:
                if count >= out.shape[0]:
                    status = 2
                    break
                for j in range(d):
                    out[count, j] = chosen[j]
                count += 1
                cpos[level] += 1
                continue
            for i in range(n):
                acc = np.int16(0)
                for k in range(n):
                    acc = add_t[acc, mul_t[tgt_gram[i, k], vecs[c, k]]]
                t[i] = acc
            for v in range(Nv):
                acc = np.int16(0)
                for i in range(n):
                    acc = add_t[acc, mul_t[vecs[v, i], t[i]]]
                dv[level, v] = acc
            work += Nv * (n + 1)
            nxt = level + 1
            cc = 0
            for v in range(Nv):
                if norms[v] != src_gram[nxt, nxt]:
                    continue
                ok = True
                for i in range(nxt):
                    if dv[i, v] != src_gram[i, nxt]:
                        ok = False
                        break
                if ok:
                    cand[nxt, cc] = v
                    cc += 1
            clen[nxt] = cc
            cpos[nxt] = 0
            level = nxt
        return status, count, work

    @njit(cache=True, nogil=True)
    def _nb_gram_norms(vecs, gram, add_t, mul_t):
        Nv, n = vecs.shape
        out = np.zeros(Nv, dtype=np.int16)
        for v in range(Nv):
            acc = np.int16(0)
            for i in range(n):
                ti = np.int16(0)
                for j in range(n):
                    ti = add_t[ti, mul_t[vecs[v, j], gram[i, j]]]
                acc = add_t[acc, mul_t[vecs[v, i], ti]]
            out[v] = acc
        return out

    _NUMBA_IMPLS = {
        "table_matmul": _nb_table_matmul,
        "table_dot_rows": _nb_table_dot_rows,
        "rref_mod": _nb_rref_mod,
        "sparse_rank": _nb_sparse_rank,
        "isometry_dfs": _nb_isometry_dfs,
        "gram_norms": _nb_gram_norms,
    }
else:
    _NUMBA_IMPLS = None

IMPLEMENTATIONS = {"numpy": _NUMPY_IMPLS}
if _NUMBA_IMPLS is not None:
    IMPLEMENTATIONS["numba"] = _NUMBA_IMPLS

BACKEND = "numba" if _NUMBA_IMPLS is not None else "numpy"
_ACTIVE = IMPLEMENTATIONS[BACKEND]

table_matmul = _ACTIVE["table_matmul"]
table_dot_rows = _ACTIVE["table_dot_rows"]
gram_norms = _ACTIVE["gram_norms"]
_rref_kernel = _ACTIVE["rref_mod"]
_sparse_rank_kernel = _ACTIVE["sparse_rank"]
isometry_dfs = _ACTIVE["isometry_dfs"]


def inverse_table_mod(p):
    """Table of multiplicative inverses in Z/p (index 0 unused)."""
    t = np.zeros(p, dtype=np.int64)
    for x in range(1, p):
        t[x] = pow(x, -1, p)
    return t


def rref_mod(A, p):
    """RREF of an int matrix over Z/p.  Returns (R, pivot_cols, rank)."""
    R = np.ascontiguousarray(np.asarray(A, dtype=np.int64) % p)
    if R.size == 0:
        return R, np.zeros(0, dtype=np.int64), 0
    piv, rank = _rref_kernel(R, p, inverse_table_mod(p))
    return R, piv, rank


def rank_mod(A, p):
    return rref_mod(A, p)[2]


def nullspace_mod(A, p):
    """Kernel basis (columns) of an integer matrix over Z/p."""
    A = np.asarray(A, dtype=np.int64) % p
    m, n = A.shape
    R, piv, rank = rref_mod(A, p)
    pivset = set(int(c) for c in piv)
    free = [c for c in range(n) if c not in pivset]
    N = np.zeros((n, len(free)), dtype=np.int64)
    for j, fc in enumerate(free):
        N[fc, j] = 1
        for ri in range(rank):
            N[int(piv[ri]), j] = (-R[ri, fc]) % p
    return N


def sparse_rank(indptr, indices, values, nrows, p, max_rank=None):
    """Rank over Z/p of a matrix given as CSC-style sparse columns."""
    if nrows == 0 or indptr[-1] == 0:
        return 0
    if max_rank is None:
        max_rank = nrows
    return int(
        _sparse_rank_kernel(
            np.ascontiguousarray(indptr, dtype=np.int64),
            np.ascontiguousarray(indices, dtype=np.int64),
            np.ascontiguousarray(values, dtype=np.int64),
            nrows,
            p,
            inverse_table_mod(p),
            int(max_rank),
        )
    )
