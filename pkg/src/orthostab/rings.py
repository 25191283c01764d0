"""Exact arithmetic in finite commutative rings with 2 a unit.

A ring is presented as an ordered product of local factors, each either
Z/p^k or GF(p^k) with p an odd prime.  Elements are integer *codes* in
``[0, size)``: the code is mixed-radix over the factors (earlier factors
are less significant), a Z/p^k part is its canonical representative, and
a GF(p^k) part is the base-p value of its coefficient vector (constant
term least significant).  All arithmetic is table-driven, so matrix work
can run through the kernels in :mod:`orthostab.kernels`.

Composite odd moduli are accepted as ``Z/m`` and normalised to a product
of Z/p^k factors in ascending-p order.  Class labels and square classes
refer to factor positions in that order (0-based in code, 1-based in the
JSON interfaces).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, UsageError

MAX_RING_SIZE = 4096  # desk scale: guards table construction


def _is_prime(n):
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def _poly_mod(poly, modulus, p):
    """Reduce a coefficient tuple modulo a monic polynomial, coeffs mod p."""
    poly = [c % p for c in poly]
    k = len(modulus) - 1
    while len(poly) > k:
        lead = poly[-1]
        if lead:
            shift = len(poly) - 1 - k
            for i in range(k + 1):
                poly[shift + i] = (poly[shift + i] - lead * modulus[i]) % p
        poly.pop()
    while len(poly) < k:
        poly.append(0)
    return poly


def _poly_divides(div, poly, p):
    """True if monic `div` divides `poly` with coefficients mod p."""
    rem = [c % p for c in poly]
    dd = len(div) - 1
    while len(rem) > dd:
        lead = rem[-1]
        if lead:
            shift = len(rem) - 1 - dd
            for i in range(dd + 1):
                rem[shift + i] = (rem[shift + i] - lead * div[i]) % p
        rem.pop()
    return all(c == 0 for c in rem)


def _check_irreducible(modulus, p, k):
    """Root/low-degree-factor search; supports k <= 4 only."""
    if k == 1:
        return
    if k > 4:
        raise DomainError("GF(p^k) moduli with k > 4 are out of scope")
    for x in range(p):
        val = 0
        for c in reversed(modulus):
            val = (val * x + c) % p
        if val == 0:
            raise DomainError(
                "modulus polynomial has root %d mod %d, not irreducible" % (x, p)
            )
    if k == 4:
        # degree-4 polynomial with no roots can still split into two quadratics
        for b in range(p):
            for c in range(p):
                quad = (c, b, 1)
                has_root = any(
                    (x * x + b * x + c) % p == 0 for x in range(p)
                )
                if has_root:
                    continue
                if _poly_divides(quad, modulus, p):
                    raise DomainError(
                        "modulus polynomial divisible by an irreducible quadratic"
                    )


def default_gf_modulus(p, k):
    """Smallest monic irreducible of degree k mod p, by coefficient order."""
    if k == 1:
        return (0, 1)
    import itertools

    for lower in itertools.product(range(p), repeat=k):
        modulus = tuple(lower) + (1,)
        try:
            _check_irreducible(modulus, p, k)
            return modulus
        except DomainError:
            continue
    raise DomainError("no irreducible polynomial found (p=%d, k=%d)" % (p, k))


class LocalFactor:
    """One local factor: Z/p^k or GF(p^k), with all lookup tables built."""

    def __init__(self, kind, p, k, modulus=None):
        if not _is_prime(p) or p == 2:
            raise DomainError("factor characteristic must be an odd prime, got %r" % (p,))
        if k < 1:
            raise DomainError("factor exponent must be positive")
        self.kind = kind
        self.p = p
        self.k = k
        self.size = p**k
        if kind == "zpk":
            self.modulus = None
        elif kind == "gf":
            if modulus is None:
                modulus = default_gf_modulus(p, k)
            modulus = tuple(c % p for c in modulus[:-1]) + (modulus[-1],)
            if len(modulus) != k + 1 or modulus[-1] != 1:
                raise DomainError("GF modulus must be monic of degree k")
            _check_irreducible(modulus, p, k)
            self.modulus = modulus
        else:
            raise DomainError("unknown local ring kind %r" % (kind,))
        self._build_tables()
        self._build_residue()

    # -- construction -----------------------------------------------------

    def _build_tables(self):
        m = self.size
        p = self.p
        if self.kind == "zpk":
            idx = np.arange(m, dtype=np.int64)
            self.add_t = ((idx[:, None] + idx[None, :]) % m).astype(np.int16)
            self.mul_t = ((idx[:, None] * idx[None, :]) % m).astype(np.int16)
            self.neg_t = ((-idx) % m).astype(np.int16)
            self.unit_mask = (idx % p) != 0
        else:
            k = self.k
            coeffs = [self._gf_coeffs(c) for c in range(m)]
            add = np.zeros((m, m), dtype=np.int16)
            mul = np.zeros((m, m), dtype=np.int16)
            for a in range(m):
                ca = coeffs[a]
                for b in range(a, m):
                    cb = coeffs[b]
                    s = [(ca[i] + cb[i]) % p for i in range(k)]
                    add[a, b] = add[b, a] = self._gf_code(s)
                    prod = [0] * (2 * k - 1)
                    for i in range(k):
                        if ca[i] == 0:
                            continue
                        for j in range(k):
                            prod[i + j] += ca[i] * cb[j]
                    mul[a, b] = mul[b, a] = self._gf_code(
                        _poly_mod(prod, self.modulus, p)
                    )
            self.add_t = add
            self.mul_t = mul
            self.neg_t = np.array(
                [self._gf_code([(-c) % p for c in coeffs[a]]) for a in range(m)],
                dtype=np.int16,
            )
            self.unit_mask = np.arange(m) != 0
        inv = np.full(m, -1, dtype=np.int16)
        one_col = self.mul_t == 1
        for a in range(m):
            if self.unit_mask[a]:
                inv[a] = int(np.nonzero(one_col[a])[0][0])
        self.inv_t = inv

    def _build_residue(self):
        m = self.size
        p = self.p
        if self.kind == "zpk":
            self.res_t = (np.arange(m) % p).astype(np.int16)
            self.residue_field = self if self.k == 1 else LocalFactor.prime_field(p)
        else:
            self.res_t = np.arange(m, dtype=np.int16)
            self.residue_field = self
        rf = self.residue_field
        sq = np.zeros(rf.size, dtype=bool)
        for x in range(rf.size):
            sq[rf.mul_t[x, x]] = True
        self.residue_squares = sq
        ns = -1
        for a in range(m):
            r = int(self.res_t[a])
            if rf.unit_mask[r] and not sq[r]:
                ns = a
                break
        self.nonsquare_code = ns  # smallest representative with nonsquare residue

    _PRIME_FIELDS = {}

    @classmethod
    def prime_field(cls, p):
        if p not in cls._PRIME_FIELDS:
            cls._PRIME_FIELDS[p] = cls("zpk", p, 1)
        return cls._PRIME_FIELDS[p]

    # -- identity ----------------------------------------------------------

    @property
    def signature(self):
        return (self.kind, self.p, self.k, self.modulus)

    @property
    def name(self):
        if self.kind == "zpk":
            return "Z/%d" % self.size
        return "GF(%d)" % self.size

    def __repr__(self):
        return "LocalFactor(%s)" % self.name

    def __eq__(self, other):
        return isinstance(other, LocalFactor) and self.signature == other.signature

    def __hash__(self):
        return hash(self.signature)

    # -- element helpers ----------------------------------------------------

    def _gf_coeffs(self, code):
        out = []
        for _ in range(self.k):
            out.append(code % self.p)
            code //= self.p
        return out

    def _gf_code(self, coeffs):
        code = 0
        for c in reversed(coeffs):
            code = code * self.p + (c % self.p)
        return code

    def embed_int(self, x):
        """Image of an integer under the canonical map Z -> factor."""
        if self.kind == "zpk":
            return x % self.size
        return x % self.p

    def coeffs(self, code):
        """Coefficient vector (constant term first) for GF factors."""
        if self.kind != "gf":
            raise UsageError("coeffs() only applies to GF factors")
        return self._gf_coeffs(code)

    # -- scalar ops ----------------------------------------------------------

    def add(self, a, b):
        return int(self.add_t[a, b])

    def sub(self, a, b):
        return int(self.add_t[a, self.neg_t[b]])

    def mul(self, a, b):
        return int(self.mul_t[a, b])

    def neg(self, a):
        return int(self.neg_t[a])

    def inv(self, a):
        v = int(self.inv_t[a])
        if v < 0:
            raise DomainError("element %d is not a unit in %s" % (a, self.name))
        return v

    def is_unit(self, a):
        return bool(self.unit_mask[a])

    # -- vectorised ops (used by the per-factor elimination routines) ---------

    def add_arr(self, A, B):
        return self.add_t[A, B]

    def sub_arr(self, A, B):
        return self.add_t[A, self.neg_t[B]]

    def mul_arr(self, A, B):
        return self.mul_t[A, B]

    def neg_arr(self, A):
        return self.neg_t[A]

    # -- square classes -------------------------------------------------------

    def residue(self, a):
        return int(self.res_t[a])

    def residue_is_square(self, a):
        return bool(self.residue_squares[self.res_t[a]])

    def sqrt_unit(self, a):
        """Smallest v with v*v == a, for units with square residue, else None."""
        if not self.is_unit(a):
            raise DomainError("square root requested for non-unit in %s" % self.name)
        if not self.residue_is_square(a):
            return None
        if self.kind == "gf":
            for v in range(self.size):
                if self.mul_t[v, v] == a:
                    return v
            raise DomainError("unreachable: square residue without root")
        # Z/p^k: exhaustive root in the residue field, then Newton lifting
        # (the root is simple because 2 is a unit).
        p, m = self.p, self.size
        r0 = None
        for v in range(p):
            if (v * v) % p == a % p:
                r0 = v
                break
        if r0 is None:
            raise DomainError("unreachable: square residue without root")
        x = r0
        inv2 = pow(2, -1, m)
        for _ in range(self.k):
            x = (x + a * pow(x, -1, m)) * inv2 % m
        assert (x * x) % m == a
        return min(x, m - x)


class RingSpec:
    """An ordered product of local factors with global element tables."""

    def __init__(self, factors):
        factors = tuple(factors)
        if not factors:
            raise DomainError("a ring needs at least one local factor")
        self.factors = factors
        self.nfactors = len(factors)
        size = 1
        strides = []
        for f in factors:
            strides.append(size)
            size *= f.size
        if size > MAX_RING_SIZE:
            raise DomainError(
                "ring of size %d exceeds the desk-scale cap %d" % (size, MAX_RING_SIZE)
            )
        self.size = size
        self.strides = tuple(strides)
        self._build()

    def _build(self):
        codes = np.arange(self.size, dtype=np.int64)
        parts = []
        for f, s in zip(self.factors, self.strides):
            parts.append(((codes // s) % f.size).astype(np.int16))
        self._parts = parts  # per-factor part of every code
        add = np.zeros((self.size, self.size), dtype=np.int64)
        mul = np.zeros((self.size, self.size), dtype=np.int64)
        neg = np.zeros(self.size, dtype=np.int64)
        unit = np.ones(self.size, dtype=bool)
        for f, s, pa in zip(self.factors, self.strides, parts):
            add += s * f.add_t[pa[:, None], pa[None, :]].astype(np.int64)
            mul += s * f.mul_t[pa[:, None], pa[None, :]].astype(np.int64)
            neg += s * f.neg_t[pa].astype(np.int64)
            unit &= f.unit_mask[pa]
        self.add_t = add.astype(np.int16)
        self.mul_t = mul.astype(np.int16)
        self.neg_t = neg.astype(np.int16)
        self.unit_mask = unit
        inv = np.full(self.size, -1, dtype=np.int64)
        ucodes = np.nonzero(unit)[0]
        acc = np.zeros(len(ucodes), dtype=np.int64)
        for f, s, pa in zip(self.factors, self.strides, parts):
            acc += s * f.inv_t[pa[ucodes]].astype(np.int64)
        inv[ucodes] = acc
        self.inv_t = inv.astype(np.int16)
        self.one = self.encode([f.embed_int(1) for f in self.factors])
        self.zero = 0
        self.unit_codes = ucodes.astype(np.int64)

    # -- constructors -------------------------------------------------------

    @staticmethod
    def zmod(m):
        """Z/m for odd m >= 3, split into prime-power factors (ascending p)."""
        if m < 3 or m % 2 == 0:
            raise DomainError("Z/m requires odd m >= 3, got %r" % (m,))
        factors = []
        rest = m
        d = 3
        while d * d <= rest:
            if rest % d == 0:
                k = 0
                while rest % d == 0:
                    rest //= d
                    k += 1
                factors.append(LocalFactor("zpk", d, k))
            d += 2
        if rest > 1:
            factors.append(LocalFactor("zpk", rest, 1))
        factors.sort(key=lambda f: f.p)
        return RingSpec(factors)

    @staticmethod
    def gf(p, k=1, modulus=None):
        return RingSpec([LocalFactor("gf", p, k, modulus)])

    @staticmethod
    def zpk(p, k):
        return RingSpec([LocalFactor("zpk", p, k)])

    # -- identity -----------------------------------------------------------

    @property
    def signature(self):
        return tuple(f.signature for f in self.factors)

    @property
    def name(self):
        return " x ".join(f.name for f in self.factors)

    def __repr__(self):
        return "RingSpec(%s)" % self.name

    def __eq__(self, other):
        return isinstance(other, RingSpec) and self.signature == other.signature

    def __hash__(self):
        return hash(self.signature)

    # -- element codes --------------------------------------------------------

    def encode(self, parts):
        if len(parts) != self.nfactors:
            raise UsageError("expected %d parts, got %d" % (self.nfactors, len(parts)))
        code = 0
        for part, f, s in zip(parts, self.factors, self.strides):
            if not 0 <= part < f.size:
                raise UsageError("part %r out of range for %s" % (part, f.name))
            code += part * s
        return code

    def decode(self, code):
        return tuple(
            (code // s) % f.size for f, s in zip(self.factors, self.strides)
        )

    def part(self, code, i):
        return (code // self.strides[i]) % self.factors[i].size

    def embed_int(self, x):
        """Image of an integer under the canonical map Z -> R."""
        return self.encode([f.embed_int(x) for f in self.factors])

    # -- scalar arithmetic ------------------------------------------------------

    def add(self, a, b):
        return int(self.add_t[a, b])

    def sub(self, a, b):
        return int(self.add_t[a, self.neg_t[b]])

    def mul(self, a, b):
        return int(self.mul_t[a, b])

    def neg(self, a):
        return int(self.neg_t[a])

    def arith(self, a, b, op):
        if op == "add":
            return self.add(a, b)
        if op == "sub":
            return self.sub(a, b)
        if op == "mul":
            return self.mul(a, b)
        raise UsageError("unknown ring operation %r" % (op,))

    def is_unit(self, a):
        return bool(self.unit_mask[a])

    def unit_flags(self, a):
        return tuple(
            bool(f.unit_mask[self.part(a, i)]) for i, f in enumerate(self.factors)
        )

    def invert(self, a):
        v = int(self.inv_t[a])
        if v < 0:
            for i, ok in enumerate(self.unit_flags(a)):
                if not ok:
                    raise DomainError(
                        "element not invertible in factor %d (%s)"
                        % (i, self.factors[i].name),
                        factor=i,
                    )
        return v

    # -- residue fields and square classes ----------------------------------------

    def residue_field(self, i):
        return self.factors[i].residue_field

    def residue(self, a, i):
        """Residue-field code of the i-th part of a."""
        return self.factors[i].residue(self.part(a, i))

    def square_class(self, u):
        """Factor indices (0-based) where u's residue is a nonsquare."""
        if not self.is_unit(u):
            raise DomainError("square class is defined for units only")
        out = []
        for i, f in enumerate(self.factors):
            if not f.residue_is_square(self.part(u, i)):
                out.append(i)
        return frozenset(out)

    def sqrt_unit(self, u):
        """v with v*v == u when every residue is a square, else None."""
        if not self.is_unit(u):
            raise DomainError("square root is defined for units only")
        parts = []
        for i, f in enumerate(self.factors):
            r = f.sqrt_unit(self.part(u, i))
            if r is None:
                return None
            parts.append(r)
        return self.encode(parts)

    def factor_nonsquare(self, i):
        """Smallest representative in factor i with nonsquare residue."""
        ns = self.factors[i].nonsquare_code
        assert ns >= 0
        return ns

    def nonsquare_elem(self, i):
        """Ring element: canonical nonsquare in factor i, 1 elsewhere."""
        parts = [f.embed_int(1) for f in self.factors]
        parts[i] = self.factor_nonsquare(i)
        return self.encode(parts)

    def x_element(self, nonsquare_set):
        """The canonical rank-1 generator value for a class label."""
        parts = [f.embed_int(1) for f in self.factors]
        for i in nonsquare_set:
            parts[i] = self.factor_nonsquare(i)
        return self.encode(parts)

    # -- matrices of codes -----------------------------------------------------

    def project_matrix(self, A, i):
        """Per-factor part of a code matrix."""
        f, s = self.factors[i], self.strides[i]
        return ((A.astype(np.int64) // s) % f.size).astype(np.int16)

    def combine_matrices(self, mats):
        """CRT: reassemble a code matrix from per-factor part matrices."""
        assert len(mats) == self.nfactors
        out = np.zeros_like(mats[0], dtype=np.int64)
        for M, s in zip(mats, self.strides):
            out += s * M.astype(np.int64)
        return out.astype(np.int16)


@dataclass(frozen=True)
class RingElem:
    """A single ring element; thin wrapper used at the API/CLI boundary."""

    ring: RingSpec
    code: int

    def _check(self, other):
        if self.ring != other.ring:
            raise UsageError("ring mismatch: %s vs %s" % (self.ring.name, other.ring.name))

    def __add__(self, other):
        self._check(other)
        return RingElem(self.ring, self.ring.add(self.code, other.code))

    def __sub__(self, other):
        self._check(other)
        return RingElem(self.ring, self.ring.sub(self.code, other.code))

    def __mul__(self, other):
        self._check(other)
        return RingElem(self.ring, self.ring.mul(self.code, other.code))

    def inverse(self):
        return RingElem(self.ring, self.ring.invert(self.code))

    @property
    def is_unit(self):
        return self.ring.is_unit(self.code)

    @property
    def parts(self):
        return self.ring.decode(self.code)

    def __repr__(self):
        return "RingElem(%s; %s)" % (self.ring.name, list(self.parts))


@lru_cache(maxsize=None)
def _cached_zmod(m):
    return RingSpec.zmod(m)
