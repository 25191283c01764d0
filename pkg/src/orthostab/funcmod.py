"""Finitely presented functor modules on the isometry category.

Everything is evaluated on a skeleton: one canonical representative per
isomorphism class per rank up to a horizon, with morphism sets computed
against representatives and transported along fixed isomorphisms chosen
once per concrete form (the canonical-form transform).  Coefficients are
prime fields Z/ell, so evaluations are plain exact linear algebra.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import kernels, linalg
from .errors import BudgetError, DomainError, PropertyViolation
from .forms import OrthForm, canonical_form, canonical_rep, orthogonal_complement
from .isometry import DEFAULT_BUDGET, OrthGroup, automorphism_group, enumerate_isometries
from .wpo import MorphismKey, enumerate_keys, total_less


@dataclass(frozen=True)
class ObjectIndex:
    """One isomorphism class in the skeleton: rank plus nonsquare label."""

    rank: int
    label: frozenset

    def sort_key(self):
        return (self.rank, tuple(sorted(self.label)))

    def __repr__(self):
        return "ObjectIndex(%d, %s)" % (self.rank, sorted(self.label))


class Skeleton:
    """Canonical representatives up to a rank horizon, with Hom-set caches."""

    def __init__(self, ring, horizon, budget=DEFAULT_BUDGET):
        self.ring = ring
        self.horizon = horizon
        self.budget = budget
        self._forms = {}
        self._homs = {}
        self._auts = {}
        self._reps = {}

    def objects(self, max_rank=None):
        top = self.horizon if max_rank is None else max_rank
        out = [ObjectIndex(0, frozenset())]
        labels = sorted(
            (frozenset(c) for r in range(self.ring.nfactors + 1)
             for c in itertools.combinations(range(self.ring.nfactors), r)),
            key=lambda s: (len(s), tuple(sorted(s))),
        )
        for rank in range(1, top + 1):
            for lab in labels:
                out.append(ObjectIndex(rank, lab))
        return out

    def form(self, obj):
        if obj not in self._forms:
            if obj.rank > self.horizon:
                raise DomainError("rank %d exceeds horizon %d" % (obj.rank, self.horizon))
            self._forms[obj] = canonical_rep(self.ring, obj.rank, obj.label)
        return self._forms[obj]

    def hom(self, src, tgt):
        """Deterministically ordered matrices of all isometries src -> tgt."""
        key = (src, tgt)
        if key not in self._homs:
            mats = enumerate_isometries(
                self.form(src), self.form(tgt), budget=self.budget
            )
            index = {M.tobytes(): i for i, M in enumerate(mats)}
            self._homs[key] = (mats, index)
        return self._homs[key][0]

    def hom_index(self, src, tgt):
        self.hom(src, tgt)
        return self._homs[(src, tgt)][1]

    def aut(self, obj):
        if obj not in self._auts:
            self._auts[obj] = automorphism_group(self.form(obj), budget=self.budget)
        return self._auts[obj]

    def to_rep(self, form):
        """(object, T) with T an isometry rep-form -> form (fixed per form)."""
        key = form.key()
        if key not in self._reps:
            label, T = canonical_form(form)
            obj = ObjectIndex(label.rank, label.nonsquare)
            self._reps[key] = (obj, T)
        return self._reps[key]


@dataclass(frozen=True)
class Relation:
    """A K-linear combination of (generator, morphism) pairs at one object."""

    at: ObjectIndex
    terms: tuple  # ((gen_idx, matrix, coeff), ...)


class Evaluation:
    """M(V): a quotient of the free span of (generator, morphism) pairs."""

    def __init__(self, free_dim, offsets, rel_rref, rel_pivots, ell):
        self.free_dim = free_dim
        self.offsets = offsets
        self.rel_rref = rel_rref
        self.rel_pivots = list(int(c) for c in rel_pivots)
        pivset = set(self.rel_pivots)
        self.coords = [c for c in range(free_dim) if c not in pivset]
        self.dim = len(self.coords)
        self.ell = ell
        self._coord_pos = {c: i for i, c in enumerate(self.coords)}

    def reduce(self, vec):
        """Quotient coordinates of a free vector."""
        v = vec.astype(np.int64) % self.ell
        for row_i, pc in enumerate(self.rel_pivots):
            if v[pc]:
                v = (v - v[pc] * self.rel_rref[row_i]) % self.ell
        out = np.zeros(self.dim, dtype=np.int64)
        for i, c in enumerate(self.coords):
            out[i] = v[c]
        return out

    def basis_free_index(self, i):
        """Free-coordinate index of the i-th quotient basis vector."""
        return self.coords[i]


class ModulePresentation:
    """A functor module given by generators and relations, over Z/ell."""

    def __init__(self, skeleton, ell, generators, relations=()):
        if ell < 2 or any(ell % d == 0 for d in range(2, ell)):
            raise DomainError("coefficients must be a prime field Z/ell")
        self.skeleton = skeleton
        self.ring = skeleton.ring
        self.ell = ell
        self.generators = list(generators)
        self.relations = list(relations)
        self._evals = {}
        self._acts = {}

    @classmethod
    def representable(cls, skeleton, ell, obj):
        return cls(skeleton, ell, [obj])

    @property
    def horizon(self):
        return self.skeleton.horizon

    def evaluate(self, V):
        """The K-space M(V), with a deterministic quotient basis."""
        if V.rank > self.horizon:
            raise DomainError("evaluation above horizon (rank %d)" % V.rank)
        if V in self._evals:
            return self._evals[V]
        sk = self.skeleton
        offsets = []
        free_dim = 0
        for g in self.generators:
            offsets.append(free_dim)
            if g.rank <= V.rank:
                free_dim += len(sk.hom(g, V))
        rows = []
        for rel in self.relations:
            W = rel.at
            pushers = sk.hom(W, V) if W.rank <= V.rank else []
            for phi in pushers:
                vec = np.zeros(free_dim, dtype=np.int64)
                for gen_idx, mat, coeff in rel.terms:
                    g = self.generators[gen_idx]
                    comp = linalg.matmul(self.ring, phi, mat)
                    pos = sk.hom_index(g, V)[comp.tobytes()]
                    vec[offsets[gen_idx] + pos] = (
                        vec[offsets[gen_idx] + pos] + coeff
                    ) % self.ell
                rows.append(vec)
        if rows:
            R, piv, rank = kernels.rref_mod(np.array(rows, dtype=np.int64), self.ell)
            ev = Evaluation(free_dim, offsets, R[:rank], piv, self.ell)
        else:
            ev = Evaluation(
                free_dim, offsets, np.zeros((0, free_dim), dtype=np.int64), [], self.ell
            )
        self._evals[V] = ev
        return ev

    def dim(self, V):
        return self.evaluate(V).dim

    def _free_index(self, V, gen_idx, morphism):
        sk = self.skeleton
        ev = self.evaluate(V)
        pos = sk.hom_index(self.generators[gen_idx], V)[morphism.tobytes()]
        return ev.offsets[gen_idx] + pos

    def _gen_of_free_index(self, V, idx):
        ev = self.evaluate(V)
        g = max(i for i, off in enumerate(ev.offsets) if off <= idx)
        return g, idx - ev.offsets[g]

    def act(self, U, V, f):
        """Matrix of M(f): M(U) -> M(V) for an isometry matrix f."""
        f = linalg.as_matrix(f)
        key = (U, V, f.tobytes())
        if key in self._acts:
            return self._acts[key]
        evU = self.evaluate(U)
        evV = self.evaluate(V)
        sk = self.skeleton
        out = np.zeros((evV.dim, evU.dim), dtype=np.int64)
        for col in range(evU.dim):
            free_idx = evU.basis_free_index(col)
            gen_idx, pos = self._gen_of_free_index(U, free_idx)
            h = sk.hom(self.generators[gen_idx], U)[pos]
            comp = linalg.matmul(self.ring, f, h)
            vec = np.zeros(evV.free_dim, dtype=np.int64)
            vec[self._free_index(V, gen_idx, comp)] = 1
            out[:, col] = evV.reduce(vec)
        self._acts[key] = out
        return out


# ---------------------------------------------------------------------------
# torsion


def torsion(M, V, probe_horizon):
    """The subspace of M(V) killed by some morphism into the probe range.

    Kernels depend only on the target class (automorphism transport), so
    one morphism per reachable representative suffices.  The union of the
    kernels must itself be a subspace; a violation raises.
    """
    sk = M.skeleton
    if probe_horizon > M.horizon:
        raise DomainError("probe horizon exceeds module horizon")
    evV = M.evaluate(V)
    kernels_found = []
    for W in sk.objects(max_rank=probe_horizon):
        if W.rank < V.rank:
            continue
        homs = sk.hom(V, W)
        if not homs:
            continue
        A = M.act(V, W, homs[0])
        N = kernels.nullspace_mod(A, M.ell)
        kernels_found.append((W, N))
    if not kernels_found:
        return np.zeros((evV.dim, 0), dtype=np.int64), {"dim": 0, "targets": 0}
    stacked = np.concatenate([N for _, N in kernels_found], axis=1)
    span_rank = kernels.rank_mod(stacked.T, M.ell)
    best = max(kernels_found, key=lambda wn: kernels.rank_mod(wn[1].T, M.ell))
    best_rank = kernels.rank_mod(best[1].T, M.ell)
    if best_rank != span_rank:
        raise PropertyViolation(
            "torsion union is not a subspace within the probe horizon"
        )
    basis = best[1]
    report = {
        "dim": int(span_rank),
        "targets": len(kernels_found),
        "per_target": {repr(W): int(kernels.rank_mod(N.T, M.ell)) for W, N in kernels_found},
    }
    return basis, report


# ---------------------------------------------------------------------------
# the complement chain complex


class SigmaComplex:
    """The complement complex of a module at one object, up to degree n_max."""

    def __init__(self, M, label, n_max, V, budget=DEFAULT_BUDGET):
        self.module = M
        self.label = frozenset(label)
        self.n_max = n_max
        self.V = V
        sk = M.skeleton
        ring = M.ring
        x = ring.x_element(self.label)
        Vform = sk.form(V)

        # Hom(X^n, V) for n = 0..n_max, against the concrete power form
        self.hom_lists = []
        self.power_forms = []
        for n in range(n_max + 1):
            G = linalg.identity(ring, n)
            for i in range(n):
                G[i, i] = x
            Xn = OrthForm(ring, G, _validated=True)
            self.power_forms.append(Xn)
            self.hom_lists.append(
                enumerate_isometries(Xn, Vform, budget=budget)
            )
        self.hom_index = [
            {M_.tobytes(): i for i, M_ in enumerate(lst)} for lst in self.hom_lists
        ]

        # complement data per h: (rep object, T, embedding)
        self.comp = []
        for n in range(n_max + 1):
            level = []
            for h in self.hom_lists[n]:
                C, E = orthogonal_complement(Vform, h)
                rep, T = sk.to_rep(C)
                level.append((rep, T, E))
            self.comp.append(level)

        # chain space dims and offsets
        self.offsets = []
        self.dims = []
        for n in range(n_max + 1):
            offs = []
            total = 0
            for rep, _, _ in self.comp[n]:
                offs.append(total)
                total += M.dim(rep)
            self.offsets.append(offs)
            self.dims.append(total)

        self.boundaries = [None] * (n_max + 1)  # boundaries[n]: Sigma_n -> Sigma_{n-1}
        for n in range(1, n_max + 1):
            self.boundaries[n] = self._boundary(n)
        for n in range(2, n_max + 1):
            prod = (self.boundaries[n - 1] @ self.boundaries[n]) % M.ell
            if np.any(prod):
                raise PropertyViolation("d . d != 0 in the complement complex")

    def _insertion(self, n, i):
        """The map X^{n-1} -> X^n adding the i-th coordinate (1-based i)."""
        ring = self.module.ring
        J = np.zeros((n, n - 1), dtype=np.int16)
        row = 0
        for r in range(n):
            if r == i - 1:
                continue
            J[r, row] = ring.one
            row += 1
        return J

    def _component(self, n, h_idx, i):
        """(target index, map) for the i-th face of the h-th summand."""
        M = self.module
        ring = M.ring
        h = self.hom_lists[n][h_idx]
        J = self._insertion(n, i)
        h2 = linalg.matmul(ring, h, J)
        tgt_idx = self.hom_index[n - 1][h2.tobytes()]
        rep_s, T_s, E_s = self.comp[n][h_idx]
        rep_t, T_t, E_t = self.comp[n - 1][tgt_idx]
        Y = linalg.solve_columns(ring, E_t, E_s)
        alpha = linalg.matmul_chain(ring, linalg.inverse(ring, T_t), Y, T_s)
        return tgt_idx, M.act(rep_s, rep_t, alpha)

    def _boundary(self, n):
        M = self.module
        D = np.zeros((self.dims[n - 1], self.dims[n]), dtype=np.int64)
        for h_idx in range(len(self.hom_lists[n])):
            rep_s = self.comp[n][h_idx][0]
            src_dim = M.dim(rep_s)
            if src_dim == 0:
                continue
            col0 = self.offsets[n][h_idx]
            for i in range(1, n + 1):
                tgt_idx, A = self._component(n, h_idx, i)
                row0 = self.offsets[n - 1][tgt_idx]
                sign = 1 if (i % 2) else -1
                D[row0 : row0 + A.shape[0], col0 : col0 + src_dim] = (
                    D[row0 : row0 + A.shape[0], col0 : col0 + src_dim] + sign * A
                ) % M.ell
        return D % M.ell

    def homology_dims(self):
        """Homology at positions 0..n_max-1 of Sigma_* -> M(V) -> 0."""
        M = self.module
        out = []
        ranks = [0] * (self.n_max + 2)
        for n in range(1, self.n_max + 1):
            ranks[n] = kernels.rank_mod(self.boundaries[n], M.ell)
        for pos in range(self.n_max):
            out.append(int(self.dims[pos] - ranks[pos] - ranks[pos + 1]))
        return out


def sigma_complex(M, label, n_max, V, budget=DEFAULT_BUDGET):
    return SigmaComplex(M, label, n_max, V, budget=budget)


# ---------------------------------------------------------------------------
# left Kan extension


def kan_extend(M, N, V, budget=DEFAULT_BUDGET):
    """Colimit of M over the slice of rank-bounded objects mapping to V.

    The bounded subcategory holds all classes of rank < N plus the rank-N
    identity-class object.  Returns the comparison report against M(V).
    """
    sk = M.skeleton
    if N < 1:
        raise DomainError("kan extension needs N >= 1")
    objs = [o for o in sk.objects(max_rank=min(N - 1, sk.horizon))]
    top = ObjectIndex(N, frozenset())
    if N <= sk.horizon:
        objs.append(top)
    evV = M.evaluate(V)

    pairs = []
    pair_index = {}
    offsets = []
    total = 0
    for U in objs:
        dimU = M.dim(U)
        homs = sk.hom(U, V)
        for fi, f in enumerate(homs):
            pair_index[(U, f.tobytes())] = len(pairs)
            pairs.append((U, f))
            offsets.append(total)
            total += dimU
    if total > budget:
        raise BudgetError(
            "kan colimit dimension exceeds budget",
            diagnostics={"pairs": len(pairs), "total_dim": total},
        )

    indptr = [0]
    indices = []
    values = []
    for pj, (U2, f2) in enumerate(pairs):
        dim2 = M.dim(U2)
        for U1 in objs:
            dim1 = M.dim(U1)
            if dim1 == 0 or U1.rank > U2.rank:
                continue
            for u in sk.hom(U1, U2):
                comp = linalg.matmul(M.ring, f2, u)
                pi = pair_index[(U1, comp.tobytes())]
                A = M.act(U1, U2, u)
                for x in range(dim1):
                    indices.append(offsets[pi] + x)
                    values.append(1)
                    col = A[:, x]
                    for y in np.nonzero(col)[0]:
                        indices.append(offsets[pj] + int(y))
                        values.append(int((-col[y]) % M.ell))
                    indptr.append(len(indices))
    rel_rank = kernels.sparse_rank(
        np.array(indptr, dtype=np.int64),
        np.array(indices, dtype=np.int64),
        np.array(values, dtype=np.int64),
        total,
        M.ell,
    )
    colim_dim = total - rel_rank

    # canonical comparison to M(V)
    comp_mat = np.zeros((evV.dim, total), dtype=np.int64)
    for pi, (U, f) in enumerate(pairs):
        dimU = M.dim(U)
        if dimU == 0:
            continue
        A = M.act(U, V, f)
        comp_mat[:, offsets[pi] : offsets[pi] + dimU] = A
    comp_rank = kernels.rank_mod(comp_mat, M.ell)

    return {
        "bound": N,
        "object": {"rank": V.rank, "label": sorted(V.label)},
        "pairs": len(pairs),
        "colim_dim": int(colim_dim),
        "target_dim": int(evV.dim),
        "comparison_rank": int(comp_rank),
        "isomorphism": bool(colim_dim == evV.dim == comp_rank),
    }


# ---------------------------------------------------------------------------
# initial terms in the row-adapted representable


class AdaptedModule:
    """The representable module on row-adapted morphisms, over Z/ell.

    Basis elements at level n are the morphism keys (R^d, B) -> (R^n, I);
    the initial term of an element is its maximal key in the total order.
    """

    def __init__(self, ring, source_gram, ell, horizon, budget=DEFAULT_BUDGET):
        self.ring = ring
        self.source_gram = linalg.as_matrix(source_gram)
        self.d = self.source_gram.shape[0]
        self.ell = ell
        self.horizon = horizon
        self.budget = budget
        self.keys = {}
        self.key_index = {}
        for n in range(self.d, horizon + 1):
            ks = enumerate_keys(ring, self.source_gram, n, budget=budget)
            self.keys[n] = ks
            self.key_index[n] = {k.matrix.tobytes(): i for i, k in enumerate(ks)}
        self._steps = {}

    def levels(self):
        return sorted(self.keys)

    def dim(self, n):
        return len(self.keys.get(n, ()))

    def _category_maps(self, n, n2):
        """Row-adapted isometries (R^n, I) -> (R^n2, I)."""
        if (n, n2) not in self._steps:
            self._steps[(n, n2)] = enumerate_keys(
                self.ring, linalg.identity(self.ring, n), n2, budget=self.budget
            )
        return self._steps[(n, n2)]

    def push_closure(self, gens_by_level):
        """RREF rows per level of the submodule generated by the given vectors."""
        spans = {n: [] for n in self.levels()}
        for n, vecs in gens_by_level.items():
            for v in vecs:
                v = np.asarray(v, dtype=np.int64) % self.ell
                if v.shape != (self.dim(n),):
                    raise DomainError("generator vector has wrong length")
                spans[n].append(v)
                for n2 in self.levels():
                    if n2 <= n:
                        continue
                    for phi in self._category_maps(n, n2):
                        out = np.zeros(self.dim(n2), dtype=np.int64)
                        for idx in np.nonzero(v)[0]:
                            f = self.keys[n][int(idx)]
                            comp = linalg.matmul(self.ring, phi.matrix, f.matrix)
                            out[self.key_index[n2][comp.tobytes()]] = (
                                out[self.key_index[n2][comp.tobytes()]] + v[idx]
                            ) % self.ell
                        spans[n2].append(out)
        out = {}
        for n in self.levels():
            if spans[n]:
                R, piv, rank = kernels.rref_mod(
                    np.array(spans[n], dtype=np.int64), self.ell
                )
                out[n] = R[:rank]
            else:
                out[n] = np.zeros((0, self.dim(n)), dtype=np.int64)
        return out

    def full_module(self):
        """Spanning rows of the whole representable at every level."""
        return {
            n: np.eye(self.dim(n), dtype=np.int64) % self.ell for n in self.levels()
        }

    def init_term(self, vec, n):
        """(key index, coefficient) of the maximal nonzero coordinate."""
        v = np.asarray(vec, dtype=np.int64) % self.ell
        nz = np.nonzero(v)[0]
        if nz.size == 0:
            raise DomainError("initial term of the zero element")
        idx = int(nz[-1])  # keys are sorted ascending in the total order
        return idx, int(v[idx])

    def init_pivot_set(self, rows, n):
        """Key indices realisable as initial terms of the row span."""
        if rows.shape[0] == 0:
            return set()
        flipped = rows[:, ::-1]
        R, piv, rank = kernels.rref_mod(np.ascontiguousarray(flipped), self.ell)
        return {self.dim(n) - 1 - int(c) for c in piv}

    def init_separates(self, sub_rows, full_rows):
        """A witness (level, key index) with an initial term missing from sub.

        `sub_rows`/`full_rows` map level -> RREF rows.  Raises DomainError
        when the submodule is not proper within the horizon and
        PropertyViolation if a proper containment admits no witness.
        """
        proper = False
        witness = None
        for n in self.levels():
            sub_p = self.init_pivot_set(sub_rows[n], n)
            full_p = self.init_pivot_set(full_rows[n], n)
            if not sub_p <= full_p:
                raise PropertyViolation("submodule initial terms escape the module")
            if len(sub_p) != len(full_p):
                proper = True
                if witness is None:
                    witness = (n, min(full_p - sub_p))
        if not proper:
            raise DomainError("submodule is not proper within the horizon")
        if witness is None:
            raise PropertyViolation("proper submodule with equal initial terms")
        return witness
