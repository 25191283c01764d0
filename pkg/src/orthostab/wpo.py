"""The deletion order on row-adapted isometries into standard forms.

Keys are row-adapted isometries from a fixed square-class source form
into identity-form targets.  The partial order: f precedes g when f is
obtained from g by deleting rows disjoint from g's pivot set, factor by
factor (product partial order).  The total extension compares target
rank, then pivot sets lexicographically, then row words letter by letter
with the pivot marker smallest; product rings compare factors left to
right.
"""

from __future__ import annotations

import numpy as np

from . import adapted, linalg
from .errors import DomainError, PropertyViolation
from .forms import OrthForm, identity_form
from .isometry import Isometry, enumerate_isometries


class MorphismKey:
    """One morphism of the row-adapted category, with its order data."""

    def __init__(self, ring, source_gram, matrix):
        self.ring = ring
        self.source = OrthForm(ring, source_gram)
        matrix = linalg.as_matrix(matrix)
        self.n = matrix.shape[0]
        self.d = matrix.shape[1]
        self.target = identity_form(ring, self.n)
        self.matrix = matrix
        if self.source.rank and self.source.label().nonsquare:
            raise DomainError("key sources must have square determinant class")
        self.iso = Isometry(self.source, self.target, matrix)  # validates congruence
        prof = adapted.row_profile(ring, matrix)
        if prof is None:
            raise DomainError("key matrix is not row-adapted")
        self.profile = prof
        self._words = None
        self._sort_key = None

    @property
    def words(self):
        """Per-factor words: None marks a pivot row, else the row tuple."""
        if self._words is None:
            out = []
            for i in range(self.ring.nfactors):
                M = self.ring.project_matrix(self.matrix, i)
                piv = set(self.profile.per_factor[i])
                word = tuple(
                    None if r in piv else tuple(int(x) for x in M[r])
                    for r in range(self.n)
                )
                out.append(word)
            self._words = tuple(out)
        return self._words

    def sort_key(self):
        if self._sort_key is None:
            per = []
            for i in range(self.ring.nfactors):
                word_key = tuple(
                    (0,) if w is None else (1,) + w for w in self.words[i]
                )
                per.append((self.n, self.profile.per_factor[i], word_key))
            self._sort_key = tuple(per)
        return self._sort_key

    def key_bytes(self):
        return self.matrix.tobytes() + b"|%d|%d" % (self.n, self.d)

    def __eq__(self, other):
        return (
            isinstance(other, MorphismKey)
            and self.ring == other.ring
            and np.array_equal(self.matrix, other.matrix)
        )

    def __hash__(self):
        return hash((self.ring.signature, self.matrix.tobytes(), self.n, self.d))

    def __repr__(self):
        return "MorphismKey(n=%d, d=%d)" % (self.n, self.d)


def _check_comparable(f, g):
    if f.ring != g.ring:
        raise DomainError("keys over different rings")
    if f.d != g.d or not np.array_equal(f.source.gram, g.source.gram):
        raise DomainError("keys with different source forms are incomparable")


def deletion_sets(f, g):
    """Per-factor deletion sets witnessing f precedes g, or None."""
    _check_comparable(f, g)
    if f.n > g.n:
        return None
    return adapted.find_deletion_sets(f.ring, f.matrix, g.matrix)


def precedes(f, g):
    return deletion_sets(f, g) is not None


def total_cmp(f, g):
    _check_comparable(f, g)
    a, b = f.sort_key(), g.sort_key()
    if a < b:
        return -1
    if a > b:
        return 1
    if not np.array_equal(f.matrix, g.matrix):
        raise PropertyViolation("distinct keys share a total-order key")
    return 0


def total_less(f, g):
    return total_cmp(f, g) < 0


def word_embed(f):
    """The per-factor words; single-factor rings get a 1-tuple."""
    return f.words


def word_subsumes(small, big):
    """Subsequence-with-pivot-alignment relation on single-factor words."""
    dead = set()

    def rec(i, j):
        if i == len(small):
            # remaining letters of big must all be deletable (no pivots)
            return not any(b is None for b in big[j:])
        if j == len(big) or len(big) - j < len(small) - i:
            return False
        if (i, j) in dead:
            return False
        if big[j] is None:
            ok = small[i] is None and rec(i + 1, j + 1)
            if not ok:
                dead.add((i, j))
            return ok
        if small[i] == big[j] and rec(i + 1, j + 1):
            return True
        if rec(i, j + 1):
            return True
        dead.add((i, j))
        return False

    return rec(0, 0)


def enumerate_keys(ring, source_gram, n, budget=10**7):
    """All keys (R^d, B) -> (R^n, identity), sorted ascending in the total order."""
    src = OrthForm(ring, source_gram)
    tgt = identity_form(ring, n)
    keys = []
    for M in enumerate_isometries(src, tgt, budget=budget):
        if adapted.row_profile(ring, M) is not None:
            keys.append(MorphismKey(ring, source_gram, M))
    keys.sort(key=lambda k: k.sort_key())
    return keys


def check_order_compat(f, g, lower_keys=None):
    """Verify the order lemma on a pair f precedes g.

    Builds the insertion map phi and asserts phi . f = g; for every
    supplied key f1 < f in the same Hom set, asserts phi . f1 < g.
    Returns a report dict; raises PropertyViolation on any failure.
    """
    dels = deletion_sets(f, g)
    if dels is None:
        raise DomainError("check_order_compat requires f to precede g")
    phi = adapted.insertion_map(f.iso, g.iso, dels)
    checked = 0
    if lower_keys:
        for f1 in lower_keys:
            if f1.n != f.n or not total_less(f1, f):
                continue
            img = MorphismKey(
                f.ring, f.source.gram, linalg.matmul(f.ring, phi, f1.matrix)
            )
            if not total_less(img, g):
                raise PropertyViolation("insertion map is not order-monotone")
            checked += 1
    return {"deletions": dels, "phi": phi, "lower_checked": checked}
