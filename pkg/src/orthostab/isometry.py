"""Isometry enumeration, orthogonal groups, transporters and factorisation.

Enumeration runs depth-first over target columns with Gram-constraint
pruning, one local factor at a time; product-ring morphism sets are the
CRT products of the per-factor sets.  Output order is deterministic:
matrices sorted by their column-major code tuples, with groups listing
the identity first.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels, linalg
from .errors import BudgetError, DomainError, PropertyViolation
from .forms import OrthForm, canonical_form, canonical_rep, direct_sum, orthogonal_complement

DEFAULT_BUDGET = 10**7


def is_isometry(matrix, src, tgt):
    """Exact congruence test: matrix^t . tgt.gram . matrix == src.gram."""
    M = linalg.as_matrix(matrix)
    if M.shape != (tgt.rank, src.rank):
        raise DomainError(
            "isometry matrix shape %r does not match ranks (%d, %d)"
            % (M.shape, tgt.rank, src.rank)
        )
    return np.array_equal(linalg.congruent(src.ring, M, tgt.gram), src.gram)


@dataclass(frozen=True)
class Isometry:
    source: OrthForm
    target: OrthForm
    matrix: np.ndarray

    def __post_init__(self):
        if self.source.ring != self.target.ring:
            raise DomainError("isometry between forms over different rings")
        if not is_isometry(self.matrix, self.source, self.target):
            raise DomainError("matrix does not preserve the forms")

    @property
    def ring(self):
        return self.source.ring

    def compose(self, other):
        """self . other (apply other first)."""
        if other.target != self.source:
            raise DomainError("composition mismatch")
        return Isometry(
            other.source, self.target, linalg.matmul(self.ring, self.matrix, other.matrix)
        )


def _factor_vectors(factor, n):
    """All of F^n as rows, ascending mixed-radix order (coord 0 least significant)."""
    m = factor.size
    codes = np.arange(m**n, dtype=np.int64)
    out = np.zeros((m**n, n), dtype=np.int16)
    for i in range(n):
        out[:, i] = (codes // m**i) % m
    return out


def _factor_isometries(factor, src_g, tgt_g, budget, threads=1):
    """All n x d matrices over one local factor with M^t G M = src_g."""
    n = tgt_g.shape[0]
    d = src_g.shape[0]
    nv = factor.size**n
    if nv > budget:
        raise BudgetError(
            "candidate vector space %d exceeds budget %d" % (nv, budget),
            diagnostics={"vectors": nv},
        )
    vecs = _factor_vectors(factor, n)
    norms = kernels.gram_norms(vecs, tgt_g, factor.add_t, factor.mul_t)
    base = np.nonzero(norms == src_g[0, 0])[0].astype(np.int64)

    def run(chunk, cap, budget_share):
        while True:
            out = np.zeros((cap, d), dtype=np.int64)
            status, count, work = kernels.isometry_dfs(
                vecs,
                tgt_g,
                src_g,
                norms,
                chunk,
                factor.add_t,
                factor.mul_t,
                np.int64(budget_share),
                out,
            )
            if status == 2:
                cap *= 4
                continue
            if status == 1:
                raise BudgetError(
                    "isometry enumeration exceeded budget",
                    diagnostics={"partial_count": int(count), "work": int(work)},
                )
            return out[:count]

    if threads > 1 and base.shape[0] >= threads:
        chunks = np.array_split(base, threads)
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(
                ex.map(lambda ch: run(ch, 1024, budget // max(1, len(chunks))), chunks)
            )
        idx = np.concatenate(parts, axis=0)
    else:
        idx = run(base, 4096, budget)
    return [np.ascontiguousarray(vecs[row].T) for row in idx]


def enumerate_isometries(src, tgt, budget=DEFAULT_BUDGET, threads=1):
    """Complete, duplicate-free, deterministically ordered list of isometries.

    Returns bare matrices (n x d code arrays); wrap with Isometry as needed.
    """
    if src.ring != tgt.ring:
        raise DomainError("isometries require a common ring")
    ring = src.ring
    d, n = src.rank, tgt.rank
    if d > n:
        return []
    if d == 0:
        return [np.zeros((n, 0), dtype=np.int16)]
    per_factor = []
    total = 1
    for i, f in enumerate(ring.factors):
        mats = _factor_isometries(
            f,
            ring.project_matrix(src.gram, i),
            ring.project_matrix(tgt.gram, i),
            budget,
            threads=threads,
        )
        if not mats:
            return []
        total *= len(mats)
        if total > budget:
            raise BudgetError(
                "product of factor isometry counts exceeds budget",
                diagnostics={"factor_counts": [len(m) for m in per_factor] + [len(mats)]},
            )
        per_factor.append(mats)
    out = []
    import itertools

    for combo in itertools.product(*per_factor):
        out.append(ring.combine_matrices(list(combo)))
    out.sort(key=lambda M: M.T.tobytes())
    return out


class OrthGroup:
    """The automorphism group of a form as an explicit element list."""

    def __init__(self, form, elements):
        self.form = form
        ring = form.ring
        ident = linalg.identity(ring, form.rank)
        rest = [M for M in elements if not np.array_equal(M, ident)]
        rest.sort(key=lambda M: M.T.tobytes())
        self.elements = [ident] + rest
        self.index = {M.tobytes(): i for i, M in enumerate(self.elements)}
        self.order = len(self.elements)
        self._inv = {}
        self._gens = None

    @property
    def ring(self):
        return self.form.ring

    def mul(self, i, j):
        """Index of elements[i] @ elements[j]."""
        P = linalg.matmul(self.ring, self.elements[i], self.elements[j])
        k = self.index.get(P.tobytes())
        if k is None:
            raise PropertyViolation("group not closed under composition")
        return k

    def inv(self, i):
        k = self._inv.get(i)
        if k is None:
            M = linalg.inverse(self.ring, self.elements[i])
            k = self.index.get(np.ascontiguousarray(M, dtype=np.int16).tobytes())
            if k is None:
                raise PropertyViolation("group not closed under inversion")
            self._inv[i] = k
        return k

    def generators(self):
        """Small generating set: greedy closure over the element order."""
        if self._gens is not None:
            return self._gens
        gens = []
        closed = {0}
        frontier = [0]
        while len(closed) < self.order:
            nxt = min(i for i in range(self.order) if i not in closed)
            gens.append(nxt)
            frontier = list(closed | {nxt})
            closed.add(nxt)
            queue = [nxt]
            while queue:
                g = queue.pop()
                for h in gens:
                    for prod in (self.mul(g, h), self.mul(h, g)):
                        if prod not in closed:
                            closed.add(prod)
                            queue.append(prod)
        self._gens = gens
        return gens


def automorphism_group(form, budget=DEFAULT_BUDGET, threads=1):
    mats = enumerate_isometries(form, form, budget=budget, threads=threads)
    return OrthGroup(form, mats)


def _iso_between(a, b):
    """A bijective isometry a -> b for forms in the same class."""
    ring = a.ring
    la, Ta = canonical_form(a)
    lb, Tb = canonical_form(b)
    if la != lb:
        raise DomainError("forms are not isometric (labels %r vs %r)" % (la, lb))
    return linalg.matmul(ring, Tb, linalg.inverse(ring, Ta))


def find_transporter(f, g):
    """phi in Aut(W) with phi . f = g, built constructively (no search)."""
    if f.source != g.source or f.target != g.target:
        raise DomainError("transporter needs a common source and target")
    W = f.target
    ring = W.ring
    Cf, Ef = orthogonal_complement(W, f.matrix)
    Cg, Eg = orthogonal_complement(W, g.matrix)
    m = _iso_between(Cf, Cg)
    left = np.concatenate([g.matrix, linalg.matmul(ring, Eg, m)], axis=1)
    right = np.concatenate([f.matrix, Ef], axis=1)
    phi = linalg.matmul(ring, left, linalg.inverse(ring, right))
    if not np.array_equal(linalg.matmul(ring, phi, f.matrix), g.matrix):
        raise PropertyViolation("transporter failed phi . f = g")
    if not is_isometry(phi, W, W):
        raise PropertyViolation("transporter is not an isometry")
    return Isometry(W, W, phi)


def embed_form(V, W):
    """Some isometry V -> W, via the class relation, or DomainError."""
    ring = V.ring
    lV, TV = canonical_form(V)
    lW, TW = canonical_form(W)
    dr = W.rank - V.rank
    if dr < 0:
        raise DomainError("no embedding: source rank exceeds target rank")
    if dr == 0:
        if lV.nonsquare != lW.nonsquare:
            raise DomainError("no embedding: equal ranks but different classes")
        mat = linalg.matmul(ring, TW, linalg.inverse(ring, TV))
    else:
        comp = canonical_rep(ring, dr, lV.nonsquare ^ lW.nonsquare)
        F = direct_sum(canonical_rep(ring, V.rank, lV.nonsquare), comp)
        lF, TF = canonical_form(F)
        assert lF == lW
        J = np.zeros((W.rank, V.rank), dtype=np.int16)
        for i in range(V.rank):
            J[i, i] = ring.one
        mat = linalg.matmul_chain(
            ring, TW, linalg.inverse(ring, TF), J, linalg.inverse(ring, TV)
        )
    return Isometry(V, W, mat)


def factor_through(f, g):
    """h: V -> W with h . f = g, for f: U -> V and g: U -> W."""
    if f.source != g.source:
        raise DomainError("factor_through needs a common source")
    V, W = f.target, g.target
    i = embed_form(V, W)
    lifted = i.compose(f)
    phi = find_transporter(lifted, g)
    h = phi.compose(i)
    if not np.array_equal(
        linalg.matmul(h.ring, h.matrix, f.matrix), g.matrix
    ):
        raise PropertyViolation("factor_through failed h . f = g")
    return h


def hom_count(V, W, budget=DEFAULT_BUDGET, threads=1):
    """|Hom(V, V + W)| with the orbit-stabilizer crosscheck |Aut(V+W)|/|Aut(W)|."""
    T = direct_sum(V, W)
    homs = enumerate_isometries(V, T, budget=budget, threads=threads)
    autT = automorphism_group(T, budget=budget, threads=threads)
    autW = automorphism_group(W, budget=budget, threads=threads)
    if autT.order % autW.order:
        raise PropertyViolation("automorphism orders are not divisible")
    quotient = autT.order // autW.order
    if len(homs) != quotient:
        raise PropertyViolation(
            "hom count %d disagrees with group quotient %d" % (len(homs), quotient)
        )
    return {
        "hom_count": len(homs),
        "aut_sum_order": autT.order,
        "aut_summand_order": autW.order,
        "quotient": quotient,
    }
