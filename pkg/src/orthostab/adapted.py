"""Column/row-adapted maps: recognition, factorisation, insertion.

A map over a product ring is column-adapted when each induced local-factor
matrix is: pivot columns are exact standard basis vectors in increasing
order, and every entry left of a row's pivot is a non-unit.  All pivot
sets here are 0-based; the JSON layer shifts to 1-based.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import DomainError, PropertyViolation
from .forms import OrthForm
from .isometry import Isometry


@dataclass(frozen=True)
class AdaptedProfile:
    """Per-factor pivot sets (tuples of 0-based column indices)."""

    per_factor: tuple

    def single(self):
        if len(self.per_factor) != 1:
            raise DomainError("profile spans several factors")
        return self.per_factor[0]


def _factor_column_profile(factor, M):
    """S_c over one local factor, or None when not column-adapted."""
    n, m = M.shape
    one = factor.embed_int(1)
    piv = []
    r = 0
    for j in range(m):
        if r == n:
            break
        col = M[:, j]
        if col[r] == one and np.count_nonzero(col) == 1:
            piv.append(j)
            r += 1
    if r < n:
        return None
    for i in range(n):
        for j in range(piv[i]):
            if factor.unit_mask[M[i, j]]:
                return None
    return tuple(piv)


def column_profile(ring, M):
    """AdaptedProfile of a code matrix, or None."""
    M = linalg.as_matrix(M)
    per = []
    for i, f in enumerate(ring.factors):
        p = _factor_column_profile(f, ring.project_matrix(M, i))
        if p is None:
            return None
        per.append(p)
    return AdaptedProfile(tuple(per))


def row_profile(ring, M):
    """S_r = S_c of the transpose."""
    return column_profile(ring, linalg.as_matrix(M).T.copy())


def is_column_adapted(ring, M):
    return column_profile(ring, M) is not None


def is_row_adapted(ring, M):
    return row_profile(ring, M) is not None


def _factor_surjection(factor, F):
    """(f1, f2) with F = f2 @ f1 over one local factor; f1 column-adapted."""
    g = F.astype(np.int16).copy()
    n, m = g.shape
    U = linalg.identity_factor(factor, n)
    r = 0
    for j in range(m):
        if r == n:
            break
        col = g[r:, j]
        unit_rows = np.nonzero(factor.unit_mask[col])[0]
        if unit_rows.size == 0:
            continue
        i0 = r + int(unit_rows[0])
        if i0 != r:
            g[[r, i0]] = g[[i0, r]]
            U[[r, i0]] = U[[i0, r]]
        s = factor.inv_t[g[r, j]]
        if s != 1:
            g[r] = factor.mul_t[g[r], s]
            U[r] = factor.mul_t[U[r], s]
        mask = g[:, j] != 0
        mask[r] = False
        if mask.any():
            c = g[mask, j]
            g[mask] = factor.add_t[g[mask], factor.neg_t[factor.mul_t[c[:, None], g[r][None, :]]]]
            U[mask] = factor.add_t[U[mask], factor.neg_t[factor.mul_t[c[:, None], U[r][None, :]]]]
        r += 1
    if r < n:
        raise DomainError(
            "map is not surjective over %s (%d of %d unit pivots)" % (factor.name, r, n)
        )
    # f2 = U^{-1}
    aug = np.concatenate([U, linalg.identity_factor(factor, n)], axis=1)
    R, piv = linalg.factor_rref(factor, aug, ncols=n)
    assert len(piv) == n
    f2 = R[:, n:].copy()
    return g, f2


def factor_surjection(ring, F):
    """Unique factorisation F = f2 @ f1, f1 column-adapted, f2 invertible."""
    F = linalg.as_matrix(F)
    f1s, f2s = [], []
    for i, f in enumerate(ring.factors):
        try:
            a, b = _factor_surjection(f, ring.project_matrix(F, i))
        except DomainError as e:
            raise DomainError("%s (factor %d)" % (e, i), factor=i) from None
        f1s.append(a)
        f2s.append(b)
    f1 = ring.combine_matrices(f1s)
    f2 = ring.combine_matrices(f2s)
    if not np.array_equal(linalg.matmul(ring, f2, f1), F):
        raise PropertyViolation("surjection factorisation failed f2 @ f1 = f")
    if column_profile(ring, f1) is None:
        raise PropertyViolation("factorisation produced a non-adapted f1")
    return f1, f2


def compose_adapted(ring, a, b):
    """Product of two column-adapted maps; adaptedness of the result is checked."""
    prod = linalg.matmul(ring, a, b)
    if column_profile(ring, prod) is None:
        raise PropertyViolation("composite of column-adapted maps is not adapted")
    return prod


@dataclass(frozen=True)
class IsometryFactorization:
    f1: Isometry  # row-adapted, into the original target
    f2: Isometry  # invertible, source -> intermediate form
    beta: OrthForm

    def composed(self):
        return self.f1.compose(self.f2)


def factor_isometry(f):
    """f = f1 . f2 with f1 row-adapted and f2 an isomorphism onto (R^n, beta)."""
    ring = f.ring
    B = f.source.gram
    Bp = f.target.gram
    ft = f.matrix.T.copy()
    f1c, f2c = factor_surjection(ring, ft)
    f1 = np.ascontiguousarray(f1c.T)
    f2 = np.ascontiguousarray(f2c.T)
    f2inv = linalg.inverse(ring, f2)
    beta_gram = linalg.congruent(ring, f2inv, B)
    beta = OrthForm(ring, beta_gram)
    if not np.array_equal(linalg.congruent(ring, f1, Bp), beta_gram):
        raise PropertyViolation("intermediate form mismatch in isometry factorisation")
    if not np.array_equal(linalg.matmul(ring, f1, f2), f.matrix):
        raise PropertyViolation("isometry factorisation failed f1 @ f2 = f")
    return IsometryFactorization(
        f1=Isometry(beta, f.target, f1),
        f2=Isometry(f.source, beta, f2),
        beta=beta,
    )


# ---------------------------------------------------------------------------
# deletion matching and insertion maps


def _match_deletions(rows_f, rows_g, pivots_g):
    """Deletion set realising rows_f from rows_g, avoiding pivots_g.

    Backtracking subsequence match preferring matches over deletions, so
    the returned set is deterministic.  Returns a tuple or None.
    """
    nf, ng = len(rows_f), len(rows_g)
    dead = set()

    def rec(i, j, deleted):
        if (i, j) in dead:
            return None
        if i == nf:
            tail = tuple(range(j, ng))
            if any(t in pivots_g for t in tail):
                dead.add((i, j))
                return None
            return deleted + tail
        if j == ng or ng - j < nf - i:
            dead.add((i, j))
            return None
        if j in pivots_g:
            if rows_f[i] == rows_g[j]:
                out = rec(i + 1, j + 1, deleted)
                if out is not None:
                    return out
            dead.add((i, j))
            return None
        if rows_f[i] == rows_g[j]:
            out = rec(i + 1, j + 1, deleted)
            if out is not None:
                return out
        out = rec(i, j + 1, deleted + (j,))
        if out is None:
            dead.add((i, j))
        return out

    return rec(0, 0, ())


def find_deletion_sets(ring, fm, gm):
    """Per-factor deletion sets realising f from g, or None.

    The relation is the product partial order: every factor must admit a
    deletion avoiding that factor's pivot rows.
    """
    fm = linalg.as_matrix(fm)
    gm = linalg.as_matrix(gm)
    if fm.shape[1] != gm.shape[1] or fm.shape[0] > gm.shape[0]:
        return None
    pf = row_profile(ring, fm)
    pg = row_profile(ring, gm)
    if pf is None or pg is None:
        return None
    out = []
    for i in range(ring.nfactors):
        fi = ring.project_matrix(fm, i)
        gi = ring.project_matrix(gm, i)
        rows_f = [tuple(int(x) for x in row) for row in fi]
        rows_g = [tuple(int(x) for x in row) for row in gi]
        got = _match_deletions(rows_f, rows_g, set(pg.per_factor[i]))
        if got is None:
            return None
        out.append(tuple(sorted(got)))
    return tuple(out)


def _factor_insertion(factor, g_i, sr_f, deletions, n):
    """The local insertion matrix: identity rows shuffled with spread rows."""
    np_rows = g_i.shape[0]
    phi = np.zeros((np_rows, n), dtype=np.int16)
    deleted = set(deletions)
    one = factor.embed_int(1)
    idx = 0
    for i in range(np_rows):
        if i in deleted:
            for a, s in enumerate(sr_f):
                phi[i, s] = g_i[i, a]
        else:
            phi[i, idx] = one
            idx += 1
    assert idx == n
    return phi


def insertion_map(f, g, deletion_sets=None):
    """phi with phi . f = g, inserting g's extra rows, per local factor.

    f and g must be row-adapted isometries into identity-form targets with
    a common source; `deletion_sets` (per factor) defaults to the matched
    sets.  The returned phi preserves the standard forms exactly.
    """
    ring = f.ring
    if f.source != g.source:
        raise DomainError("insertion requires a common source form")
    for h in (f, g):
        if not np.array_equal(h.target.gram, linalg.identity(ring, h.target.rank)):
            raise DomainError("insertion targets must carry the identity form")
    if deletion_sets is None:
        deletion_sets = find_deletion_sets(ring, f.matrix, g.matrix)
        if deletion_sets is None:
            raise DomainError("f is not obtainable from g by pivot-avoiding deletions")
    pf = row_profile(ring, f.matrix)
    n = f.target.rank
    mats = []
    for i, fac in enumerate(ring.factors):
        mats.append(
            _factor_insertion(
                fac,
                ring.project_matrix(g.matrix, i),
                pf.per_factor[i],
                deletion_sets[i],
                n,
            )
        )
    phi = ring.combine_matrices(mats)
    if not np.array_equal(linalg.matmul(ring, phi, f.matrix), g.matrix):
        raise PropertyViolation("insertion map failed phi . f = g")
    if not np.array_equal(
        linalg.congruent(ring, phi, linalg.identity(ring, g.target.rank)),
        linalg.identity(ring, n),
    ):
        raise PropertyViolation("insertion map does not preserve the standard form")
    return phi
