"""Nondegenerate symmetric bilinear forms and their exact classification.

Over a product of local rings with 2 a unit, every form diagonalises with
unit diagonal entries, and the isometry class is (rank, I) where I is the
set of factors whose residue sees a nonsquare determinant.  The canonical
representative is the identity Gram matrix, with the last diagonal entry
replaced by the canonical nonsquare element when I is nonempty.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import DomainError
from .rings import RingSpec


@dataclass(frozen=True)
class ClassLabel:
    rank: int
    nonsquare: frozenset

    def sorted_factors(self):
        return sorted(self.nonsquare)

    def __repr__(self):
        return "ClassLabel(rank=%d, nonsquare=%s)" % (self.rank, self.sorted_factors())


class OrthForm:
    """A free module of finite rank with a nondegenerate symmetric Gram matrix."""

    def __init__(self, ring, gram, _validated=False):
        self.ring = ring
        gram = linalg.as_matrix(gram)
        if not _validated:
            _check_form(ring, gram)
        self.gram = gram
        self.gram.setflags(write=False)

    @property
    def rank(self):
        return self.gram.shape[0]

    def det(self):
        return linalg.det(self.ring, self.gram)

    def label(self):
        if self.rank == 0:
            return ClassLabel(0, frozenset())
        return ClassLabel(self.rank, self.ring.square_class(self.det()))

    def key(self):
        return (self.ring.signature, self.gram.tobytes(), self.gram.shape)

    def __eq__(self, other):
        return (
            isinstance(other, OrthForm)
            and self.ring == other.ring
            and np.array_equal(self.gram, other.gram)
        )

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return "OrthForm(%s, rank=%d)" % (self.ring.name, self.rank)


def _check_form(ring, gram):
    if gram.ndim != 2 or gram.shape[0] != gram.shape[1]:
        raise DomainError("Gram matrix must be square, got shape %r" % (gram.shape,))
    if gram.size and (gram.min() < 0 or gram.max() >= ring.size):
        raise DomainError("Gram entries are not element codes of %s" % ring.name)
    if not np.array_equal(gram, gram.T):
        raise DomainError("Gram matrix must be symmetric")
    if gram.shape[0] == 0:
        return
    d = linalg.det(ring, gram)
    flags = ring.unit_flags(d)
    for i, ok in enumerate(flags):
        if not ok:
            raise DomainError(
                "form is degenerate: det not a unit in factor %d (%s)"
                % (i, ring.factors[i].name),
                factor=i,
            )


def validate_form(ring, gram):
    """Check symmetry and nondegeneracy; returns the OrthForm."""
    return OrthForm(ring, gram)


def form_from_ints(ring, rows):
    return OrthForm(ring, linalg.matrix_from_ints(ring, rows))


def identity_form(ring, n):
    return OrthForm(ring, linalg.identity(ring, n), _validated=True)


def canonical_gram(ring, label):
    """Gram matrix of the canonical representative for a class label."""
    G = linalg.identity(ring, label.rank)
    if label.rank and label.nonsquare:
        G[label.rank - 1, label.rank - 1] = ring.x_element(label.nonsquare)
    return G


def canonical_rep(ring, rank, nonsquare=frozenset()):
    label = ClassLabel(rank, frozenset(nonsquare))
    return OrthForm(ring, canonical_gram(ring, label), _validated=True)


# ---------------------------------------------------------------------------
# diagonalisation


def _diagonalize_factor(factor, G):
    """Congruence-diagonalise over one local factor; unit diagonal output.

    Pivot rule: smallest-index unit diagonal entry; when none exists, the
    smallest (i, j) with a unit off-diagonal entry fixes the diagonal via
    v_i <- v_i + v_j (2 B(i,j) is a unit, so the new B(i,i) is one).
    """
    D = G.astype(np.int16).copy()
    n = D.shape[0]
    P = linalg.identity_factor(factor, n)
    add, mul, neg = factor.add_t, factor.mul_t, factor.neg_t
    for r in range(n):
        while True:
            diag_units = [i for i in range(r, n) if factor.unit_mask[D[i, i]]]
            if diag_units:
                break
            found = None
            for i in range(r, n):
                for j in range(i + 1, n):
                    if factor.unit_mask[D[i, j]]:
                        found = (i, j)
                        break
                if found:
                    break
            if found is None:
                raise DomainError(
                    "diagonalisation stalled: residual block has no unit entry "
                    "(degenerate form?) in %s" % factor.name
                )
            i, j = found
            D[:, i] = add[D[:, i], D[:, j]]
            D[i, :] = add[D[i, :], D[j, :]]
            P[:, i] = add[P[:, i], P[:, j]]
        i0 = diag_units[0]
        if i0 != r:
            D[:, [r, i0]] = D[:, [i0, r]]
            D[[r, i0], :] = D[[i0, r], :]
            P[:, [r, i0]] = P[:, [i0, r]]
        inv = factor.inv_t[D[r, r]]
        for j in range(r + 1, n):
            if D[r, j] != 0:
                c = neg[mul[D[r, j], inv]]
                D[:, j] = add[D[:, j], mul[D[:, r], c]]
                D[j, :] = add[D[j, :], mul[D[r, :], c]]
                P[:, j] = add[P[:, j], mul[P[:, r], c]]
    return P, D


def diagonalize(form):
    """(P, D) with P invertible, D diagonal with unit entries, P^t G P = D."""
    ring = form.ring
    n = form.rank
    if n == 0:
        E = linalg.zeros(ring, (0, 0))
        return E, E.copy()
    Ps, Ds = [], []
    for i, f in enumerate(ring.factors):
        Pi, Di = _diagonalize_factor(f, ring.project_matrix(form.gram, i))
        Ps.append(Pi)
        Ds.append(Di)
    P = ring.combine_matrices(Ps)
    D = ring.combine_matrices(Ds)
    assert np.array_equal(linalg.congruent(ring, P, form.gram), D)
    return P, D


# ---------------------------------------------------------------------------
# canonical form


def _merge_pair(ring, u, v):
    """T2 with T2^t diag(u, v) T2 = diag(1, u*v), by exhaustive search.

    Searches (a, b) with u a^2 + v b^2 = 1 over all |R|^2 pairs; the
    second column is the closed-form orthogonal complement (-v b, u a).
    """
    codes = np.arange(ring.size, dtype=np.int16)
    sq = ring.mul_t[codes, codes]
    ua2 = ring.mul_t[u, sq]
    vb2 = ring.mul_t[v, sq]
    sums = ring.add_t[ua2[:, None], vb2[None, :]]
    hits = np.nonzero(sums == ring.one)
    if hits[0].size == 0:
        raise DomainError("rank-2 merge search failed (should be impossible)")
    a = int(hits[0][0])
    b = int(hits[1][0])
    T2 = np.array(
        [
            [a, ring.neg(ring.mul(v, b))],
            [b, ring.mul(u, a)],
        ],
        dtype=np.int16,
    )
    return T2


def canonical_form(form):
    """(label, T) with T^t G T equal to the canonical Gram matrix exactly.

    Algorithm: diagonalise per factor, rescale square-class entries to 1
    via exact unit square roots, then repeatedly merge diagonal pairs with
    nonsquare classes through a rank-2 exhaustive search, and finally slot
    the surviving nonsquare entry last.
    """
    ring = form.ring
    n = form.rank
    if n == 0:
        return ClassLabel(0, frozenset()), linalg.zeros(ring, (0, 0))
    T, D = diagonalize(form)
    T = T.copy()
    diag = [int(D[i, i]) for i in range(n)]
    classes = [ring.square_class(d) for d in diag]

    def rescale_to(j, target):
        s = ring.sqrt_unit(ring.mul(target, ring.invert(diag[j])))
        assert s is not None
        T[:, j] = ring.mul_t[T[:, j], s]
        diag[j] = target

    for j in range(n):
        if not classes[j]:
            rescale_to(j, ring.one)
    while True:
        live = [j for j in range(n) if classes[j]]
        if len(live) <= 1:
            break
        j, k = live[0], live[1]
        T2 = _merge_pair(ring, diag[j], diag[k])
        sub = T[:, [j, k]]
        T[:, [j, k]] = linalg.matmul(ring, sub, T2)
        prod = ring.mul(diag[j], diag[k])
        diag[j], classes[j] = ring.one, frozenset()
        diag[k], classes[k] = prod, ring.square_class(prod)
        if not classes[k]:
            rescale_to(k, ring.one)
    live = [j for j in range(n) if classes[j]]
    if live:
        j = live[0]
        I = classes[j]
        rescale_to(j, ring.x_element(I))
        if j != n - 1:
            T[:, [j, n - 1]] = T[:, [n - 1, j]]
    else:
        I = frozenset()
    label = ClassLabel(n, I)
    assert np.array_equal(
        linalg.congruent(ring, T, form.gram), canonical_gram(ring, label)
    )
    return label, T


def is_isometric(a, b):
    if a.ring != b.ring:
        raise DomainError("isometry comparison across different rings")
    return a.label() == b.label()


def direct_sum(a, b):
    if a.ring != b.ring:
        raise DomainError("direct sum across different rings")
    n, m = a.rank, b.rank
    G = linalg.zeros(a.ring, (n + m, n + m))
    G[:n, :n] = a.gram
    G[n:, n:] = b.gram
    return OrthForm(a.ring, G, _validated=True)


def orthogonal_complement(W, image_basis):
    """(complement form, embedding) for an isometrically embedded submodule.

    `image_basis` holds the embedded basis as columns.  The complement is
    the exact kernel of (image^t . gram), computed per local factor; its
    restricted Gram matrix is nondegenerate and [image | complement] is a
    basis of W.
    """
    ring = W.ring
    E = linalg.as_matrix(image_basis)
    if E.shape[0] != W.rank:
        raise DomainError("image basis has wrong ambient rank")
    d = E.shape[1]
    S = linalg.congruent(ring, E, W.gram)
    if d and not ring.is_unit(linalg.det(ring, S)):
        raise DomainError("image basis does not span a nondegenerate submodule")
    A = linalg.matmul(ring, E.T.copy(), W.gram)
    if d == 0:
        K = linalg.identity(ring, W.rank)
    else:
        K = linalg.kernel(ring, A)
    C = OrthForm(ring, linalg.congruent(ring, K, W.gram))
    full = np.concatenate([E, K], axis=1)
    if not linalg.is_invertible(ring, full):
        raise DomainError("complement did not complete the ambient basis")
    return C, K
