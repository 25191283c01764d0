import itertools

import numpy as np
import pytest

from orthostab import forms, linalg
from orthostab.errors import DomainError
from orthostab.forms import (
    ClassLabel,
    canonical_form,
    canonical_gram,
    diagonalize,
    direct_sum,
    form_from_ints,
    identity_form,
    is_isometric,
    orthogonal_complement,
    validate_form,
)
from orthostab.rings import RingSpec

from oracles import exists_isometry_zmod


GF3 = RingSpec.gf(3)
GF5 = RingSpec.gf(5)
Z9 = RingSpec.zmod(9)
Z45 = RingSpec.zmod(45)


def all_symmetric_grams(ring, n):
    """Every symmetric n x n code matrix over the ring."""
    idx = [(i, j) for i in range(n) for j in range(i, n)]
    for vals in itertools.product(range(ring.size), repeat=len(idx)):
        G = np.zeros((n, n), dtype=np.int16)
        for (i, j), v in zip(idx, vals):
            G[i, j] = G[j, i] = v
        yield G


def nondegenerate_forms(ring, n):
    for G in all_symmetric_grams(ring, n):
        if n == 0 or ring.is_unit(linalg.det(ring, G)):
            yield forms.OrthForm(ring, G, _validated=True)


def test_validate_form_examples():
    assert validate_form(GF3, linalg.identity(GF3, 2)).rank == 2
    with pytest.raises(DomainError) as e:
        form_from_ints(Z9, [[3, 0], [0, 1]])
    assert e.value.factor == 0
    f = form_from_ints(GF5, [[0, 1], [1, 0]])
    assert f.label().nonsquare == frozenset()  # det = -1 = 4, a square mod 5
    with pytest.raises(DomainError):
        form_from_ints(GF3, [[1, 1], [0, 1]])


def test_diagonalize_examples():
    f = form_from_ints(GF3, [[0, 1], [1, 0]])
    P, D = diagonalize(f)
    assert np.array_equal(linalg.congruent(GF3, P, f.gram), D)
    assert D[0, 1] == 0 and D[1, 0] == 0
    assert GF3.is_unit(D[0, 0]) and GF3.is_unit(D[1, 1])

    g = form_from_ints(Z9, [[4]])
    P, D = diagonalize(g)
    assert np.array_equal(P, linalg.identity(Z9, 1))
    assert np.array_equal(D, g.gram)

    h = form_from_ints(GF5, [[2, 0], [0, 3]])
    P, D = diagonalize(h)
    assert np.array_equal(P, linalg.identity(GF5, 2))


def test_diagonalize_product_ring_nonunit_diagonal():
    # Gram with no globally-unit diagonal entry: forces the off-diagonal rule
    # in at least one factor.
    z15 = RingSpec.zmod(15)
    f = form_from_ints(z15, [[3, 1], [1, 5]])  # det 14, a unit mod 15
    P, D = diagonalize(f)
    assert np.array_equal(linalg.congruent(z15, P, f.gram), D)
    assert z15.is_unit(D[0, 0]) and z15.is_unit(D[1, 1])


def test_diagonalize_random():
    rng = np.random.default_rng(23)
    for ring in (GF3, GF5, Z9, Z45, RingSpec.zmod(27), RingSpec.gf(3, 2)):
        done = 0
        while done < 15:
            n = int(rng.integers(1, 4))
            G = rng.integers(0, ring.size, size=(n, n))
            G = np.triu(G) + np.triu(G, 1).T
            G = G.astype(np.int16)
            if not ring.is_unit(linalg.det(ring, G)):
                continue
            done += 1
            f = forms.OrthForm(ring, G)
            P, D = diagonalize(f)
            assert np.array_equal(linalg.congruent(ring, P, G), D)
            assert linalg.is_invertible(ring, P)
            for i in range(n):
                assert ring.is_unit(D[i, i])
                for j in range(i + 1, n):
                    assert D[i, j] == 0


def test_canonical_form_examples():
    # diag(2,3) over GF(5): det 6 = 1 square -> identity class
    f = form_from_ints(GF5, [[2, 0], [0, 3]])
    label, T = canonical_form(f)
    assert label == ClassLabel(2, frozenset())
    assert np.array_equal(linalg.congruent(GF5, T, f.gram), canonical_gram(GF5, label))

    # diag(4) over Z/9 is isometric to (1)
    g = form_from_ints(Z9, [[4]])
    label, T = canonical_form(g)
    assert label == ClassLabel(1, frozenset())
    assert np.array_equal(linalg.congruent(Z9, T, g.gram), linalg.identity(Z9, 1))

    # diag(2) over GF(3) is already canonical
    h = form_from_ints(GF3, [[2]])
    label, T = canonical_form(h)
    assert label == ClassLabel(1, frozenset({0}))
    assert np.array_equal(linalg.congruent(GF3, T, h.gram), h.gram)


def test_canonical_form_idempotent():
    for ring in (GF3, GF5, Z9, Z45):
        for rank in (1, 2, 3):
            for nsq in ([], [0]) if ring.nfactors == 1 else ([], [0], [1], [0, 1]):
                label = ClassLabel(rank, frozenset(nsq))
                rep = forms.OrthForm(ring, canonical_gram(ring, label))
                got, T = canonical_form(rep)
                assert got == label
                assert np.array_equal(
                    linalg.congruent(ring, T, rep.gram), rep.gram
                )


def test_canonical_form_exhaustive_small():
    """Every nondegenerate form lands on its canonical gram, exactly."""
    for ring, n in [(GF3, 1), (GF3, 2), (GF5, 1), (GF5, 2), (Z9, 1), (Z9, 2)]:
        seen = {}
        for f in nondegenerate_forms(ring, n):
            label, T = canonical_form(f)
            assert np.array_equal(
                linalg.congruent(ring, T, f.gram), canonical_gram(ring, label)
            )
            seen.setdefault(label, 0)
            seen[label] += 1
        assert len(seen) == 2 ** ring.nfactors


def test_classification_agrees_with_brute_force_gf3():
    """is_isometric vs existence of a brute-force isometry, all pairs, rank 2."""
    fs = list(nondegenerate_forms(GF3, 2))
    grams = [[[int(x) for x in row] for row in f.gram] for f in fs]
    for i, a in enumerate(fs):
        for j, b in enumerate(fs):
            expected = exists_isometry_zmod(grams[i], grams[j], 3)
            assert is_isometric(a, b) == expected


def test_direct_sum_label_rule():
    for ring in (GF3, Z45):
        labels = [frozenset()] + [frozenset({i}) for i in range(ring.nfactors)]
        if ring.nfactors == 2:
            labels.append(frozenset({0, 1}))
        for la, lb in itertools.product(labels, repeat=2):
            a = forms.canonical_rep(ring, 1, la)
            b = forms.canonical_rep(ring, 2, lb)
            s = direct_sum(a, b)
            assert s.label() == ClassLabel(3, la ^ lb)
    # X_I + X_I is isometric to the identity class in rank 2
    x = forms.canonical_rep(GF3, 1, frozenset({0}))
    assert direct_sum(x, x).label() == ClassLabel(2, frozenset())


def test_direct_sum_rank0_is_identity_element():
    e = forms.canonical_rep(GF3, 0)
    f = form_from_ints(GF3, [[2, 0], [0, 1]])
    assert direct_sum(f, e) == f
    assert direct_sum(e, f) == f


def test_orthogonal_complement_examples():
    W = identity_form(GF3, 2)
    C, K = orthogonal_complement(W, linalg.matrix_from_ints(GF3, [[1], [0]]))
    assert C.rank == 1 and np.array_equal(C.gram, linalg.identity(GF3, 1))
    assert np.array_equal(K, linalg.matrix_from_ints(GF3, [[0], [1]]))

    C2, K2 = orthogonal_complement(W, linalg.matrix_from_ints(GF3, [[2], [0]]))
    assert C2.rank == 1
    assert np.array_equal(
        linalg.congruent(GF3, K2, W.gram), C2.gram
    )

    W3 = form_from_ints(GF3, [[1, 0, 0], [0, 1, 0], [0, 0, 2]])
    C3, K3 = orthogonal_complement(
        W3, linalg.matrix_from_ints(GF3, [[1, 0], [0, 1], [0, 0]])
    )
    assert np.array_equal(C3.gram, form_from_ints(GF3, [[2]]).gram)


def test_orthogonal_complement_random():
    rng = np.random.default_rng(31)
    for ring in (GF3, Z9, Z45):
        W = forms.canonical_rep(ring, 3, frozenset())
        # random isometric embeddings of rank-1 forms: columns with unit norm
        count = 0
        while count < 10:
            v = rng.integers(0, ring.size, size=(3, 1)).astype(np.int16)
            S = linalg.congruent(ring, v, W.gram)
            if not ring.is_unit(S[0, 0]):
                continue
            count += 1
            C, K = orthogonal_complement(W, v)
            assert C.rank == 2
            # orthogonality: v^t G K = 0
            assert not np.any(linalg.matmul_chain(ring, v.T.copy(), W.gram, K))


def test_rank0_canonical():
    e = forms.canonical_rep(Z45, 0)
    label, T = canonical_form(e)
    assert label == ClassLabel(0, frozenset())
    assert T.shape == (0, 0)
