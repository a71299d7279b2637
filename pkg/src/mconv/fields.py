"""Exact scalar arithmetic: rationals, cyclotomic fields Q(zeta_N), finite fields F_{l^k},
and the residue maps between them.

Field handles carry the arithmetic kernels; they operate on raw coefficient tuples
(power-basis coordinates: mpq for characteristic 0, ints in [0, l) for finite fields).
FieldElement is the immutable public wrapper.  No floating point anywhere.
"""

from __future__ import annotations

import functools

from .errors import (
    InvalidCharacteristic,
    NotIntegralAtPrime,
    OrderUnavailable,
    ParseError,
    RamifiedPrime,
    ResidueFieldTooSmall,
)

try:
    from gmpy2 import mpq
except ImportError:  # pragma: no cover - gmpy2 is a declared dependency
    from fractions import Fraction as mpq

_QZERO = mpq(0)
_QONE = mpq(1)


# ---------------------------------------------------------------------------
# integer helpers

def factorize(n):
    """Prime factorization by trial division, as {p: e}."""
    n = int(n)
    assert n >= 1
    out = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def divisors(n):
    """Sorted list of positive divisors."""
    ds = [1]
    for p, e in factorize(n).items():
        ds = [d * p**i for d in ds for i in range(e + 1)]
    return sorted(ds)


def euler_phi(n):
    phi = 1
    for p, e in factorize(n).items():
        phi *= (p - 1) * p ** (e - 1)
    return phi


def is_prime(n):
    if n < 2:
        return False
    return factorize(n) == {n: 1}


def multiplicative_order_int(a, n):
    """Order of a in (Z/nZ)^*; a must be a unit mod n."""
    if n == 1:
        return 1
    a %= n
    order = 1
    x = a
    while x != 1:
        x = x * a % n
        order += 1
        if order > n:
            raise ValueError(f"{a} is not a unit mod {n}")
    return order


def cyclotomic_polynomial(n):
    """Coefficients (low to high, ints) of the n-th cyclotomic polynomial.

    Computed by dividing x^n - 1 by the product of Phi_d over proper divisors d.
    """
    if n == 1:
        return (-1, 1)
    num = [0] * (n + 1)
    num[0], num[n] = -1, 1
    for d in divisors(n)[:-1]:
        num = _ipoly_exact_div(num, list(cyclotomic_polynomial(d)))
    return tuple(num)


def _ipoly_exact_div(num, den):
    # exact division of integer polynomials, low-to-high coefficient lists
    num = list(num)
    out = [0] * (len(num) - len(den) + 1)
    for i in range(len(out) - 1, -1, -1):
        c = num[i + len(den) - 1]
        assert c % den[-1] == 0
        q = c // den[-1]
        out[i] = q
        for j, dj in enumerate(den):
            num[i + j] -= q * dj
    assert all(c == 0 for c in num)
    return out


# ---------------------------------------------------------------------------
# field element wrapper

class FieldElement:
    """Immutable element of a FieldHandle, stored as a power-basis coefficient tuple."""

    __slots__ = ("field", "coeffs")

    def __init__(self, field, coeffs):
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "coeffs", tuple(coeffs))

    def __setattr__(self, *a):
        raise AttributeError("FieldElement is immutable")

    def _coerce(self, other):
        if isinstance(other, FieldElement):
            if other.field == self.field:
                return other.coeffs
            return self.field.coerce(other).coeffs
        if isinstance(other, int):
            return self.field.from_int(other)
        return NotImplemented

    def __add__(self, other):
        c = self._coerce(other)
        return NotImplemented if c is NotImplemented else FieldElement(self.field, self.field.add(self.coeffs, c))

    __radd__ = __add__

    def __sub__(self, other):
        c = self._coerce(other)
        return NotImplemented if c is NotImplemented else FieldElement(self.field, self.field.sub(self.coeffs, c))

    def __rsub__(self, other):
        c = self._coerce(other)
        return NotImplemented if c is NotImplemented else FieldElement(self.field, self.field.sub(c, self.coeffs))

    def __mul__(self, other):
        c = self._coerce(other)
        return NotImplemented if c is NotImplemented else FieldElement(self.field, self.field.mul(self.coeffs, c))

    __rmul__ = __mul__

    def __truediv__(self, other):
        c = self._coerce(other)
        return NotImplemented if c is NotImplemented else FieldElement(self.field, self.field.mul(self.coeffs, self.field.inv(c)))

    def __rtruediv__(self, other):
        c = self._coerce(other)
        return NotImplemented if c is NotImplemented else FieldElement(self.field, self.field.mul(c, self.field.inv(self.coeffs)))

    def __neg__(self):
        return FieldElement(self.field, self.field.neg(self.coeffs))

    def __pow__(self, e):
        f = self.field
        if e < 0:
            base = f.inv(self.coeffs)
            e = -e
        else:
            base = self.coeffs
        acc = f.one
        while e:
            if e & 1:
                acc = f.mul(acc, base)
            base = f.mul(base, base)
            e >>= 1
        return FieldElement(f, acc)

    def inverse(self):
        return FieldElement(self.field, self.field.inv(self.coeffs))

    def is_zero(self):
        return self.field.is_zero(self.coeffs)

    def is_one(self):
        return self.coeffs == self.field.one

    def __eq__(self, other):
        if isinstance(other, int):
            return self.coeffs == self.field.from_int(other)
        if not isinstance(other, FieldElement):
            return NotImplemented
        return self.field == other.field and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.field, self.coeffs))

    def serialize(self):
        return self.field.serialize_raw(self.coeffs)

    def __repr__(self):
        return f"FieldElement({self.field.short_name()}, {self.serialize()})"


# ---------------------------------------------------------------------------
# field handles

class FieldHandle:
    """Base class.  Subclasses provide arithmetic on raw coefficient tuples."""

    kind = None
    degree = None

    # subclasses set: one, zero (raw tuples)

    def element(self, value):
        """Build a FieldElement from an int, a raw coefficient sequence, or coerce."""
        if isinstance(value, FieldElement):
            return self.coerce(value)
        if isinstance(value, int):
            return FieldElement(self, self.from_int(value))
        coeffs = tuple(value)
        if len(coeffs) != self.degree:
            raise ValueError(f"expected {self.degree} coefficients, got {len(coeffs)}")
        return FieldElement(self, self.validate_raw(coeffs))

    def coerce(self, x):
        """Coerce a FieldElement of another field into this one (rationals embed anywhere)."""
        if x.field == self:
            return x
        if x.field.kind == "rational":
            return FieldElement(self, self.from_rational(x.coeffs[0]))
        raise TypeError(f"cannot coerce element of {x.field.short_name()} into {self.short_name()}")

    def from_rational(self, q):
        raise TypeError(f"{self.short_name()} does not embed Q")

    def is_zero(self, a):
        return a == self.zero

    def short_name(self):
        return self.kind

    def __repr__(self):
        return f"<FieldHandle {self.short_name()}>"


class RationalField(FieldHandle):
    kind = "rational"
    degree = 1

    def __init__(self):
        self.zero = (_QZERO,)
        self.one = (_QONE,)

    def add(self, a, b):
        return (a[0] + b[0],)

    def sub(self, a, b):
        return (a[0] - b[0],)

    def mul(self, a, b):
        return (a[0] * b[0],)

    def neg(self, a):
        return (-a[0],)

    def inv(self, a):
        if a[0] == 0:
            raise ZeroDivisionError("inverse of zero")
        return (1 / mpq(a[0]),)

    def from_int(self, n):
        return (mpq(n),)

    def from_rational(self, q):
        return (mpq(q),)

    def validate_raw(self, coeffs):
        return (mpq(coeffs[0]),)

    def descriptor(self):
        return {"kind": "rational"}

    def serialize_raw(self, a):
        return [_qstr(a[0])]

    def parse_raw(self, data, location=""):
        return (_qparse(data[0], location),)

    def __eq__(self, other):
        return isinstance(other, RationalField)

    def __hash__(self):
        return hash("rational")


class CyclotomicField(FieldHandle):
    """Q(zeta_N) in the power basis mod Phi_N; coefficients are exact rationals."""

    kind = "cyclotomic"

    def __init__(self, order):
        if order < 1:
            raise ValueError("cyclotomic order must be >= 1")
        self.order = order
        self.modulus = cyclotomic_polynomial(order)  # ints, low to high, monic
        self.degree = len(self.modulus) - 1
        d = self.degree
        self.zero = (_QZERO,) * d
        self.one = (_QONE,) + (_QZERO,) * (d - 1)
        # reduction rows: x^(d+j) mod Phi_N as integer coefficient tuples
        rows = []
        cur = [-c for c in self.modulus[:d]]  # x^d
        rows.append(tuple(cur))
        for _ in range(d - 2):
            cur = [0] + cur
            top = cur.pop()
            if top:
                cur = [c + top * r for c, r in zip(cur, rows[0])]
            rows.append(tuple(cur))
        self._red_rows = rows

    def add(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def sub(self, a, b):
        return tuple(x - y for x, y in zip(a, b))

    def neg(self, a):
        return tuple(-x for x in a)

    def mul(self, a, b):
        d = self.degree
        if d == 1:
            # N in {1, 2}: zeta is rational, the quotient is Q itself
            return (a[0] * b[0],)
        prod = [_QZERO] * (2 * d - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    if bj:
                        prod[i + j] += ai * bj
        out = prod[:d]
        for j in range(d - 2, -1, -1):
            c = prod[d + j]
            if c:
                row = self._red_rows[j]
                for t in range(d):
                    if row[t]:
                        out[t] += c * row[t]
        return tuple(out)

    def inv(self, a):
        if self.is_zero(a):
            raise ZeroDivisionError("inverse of zero")
        d = self.degree
        if d == 1:
            # Q(zeta_1) or Q(zeta_2): plain rationals
            return (1 / mpq(a[0]),)
        # extended Euclid in Q[x] against Phi_N
        mod = [mpq(c) for c in self.modulus]
        r0, r1 = mod, _ptrim(list(a))
        s0, s1 = [], [_QONE]
        while True:
            q, rem = _pdivmod(r0, r1)
            if not rem:
                break
            s0, s1 = s1, _psub(s0, _pmul(q, s1))
            r0, r1 = r1, rem
        lc = r1[-1]
        if len(r1) != 1:
            raise ZeroDivisionError("element not invertible (modulus not irreducible?)")
        out = [c / lc for c in s1]
        out += [_QZERO] * (d - len(out))
        return tuple(out[:d])

    def from_int(self, n):
        return (mpq(n),) + (_QZERO,) * (self.degree - 1)

    def from_rational(self, q):
        return (mpq(q),) + (_QZERO,) * (self.degree - 1)

    def validate_raw(self, coeffs):
        return tuple(mpq(c) for c in coeffs)

    def generator(self):
        """zeta_N as an element (the power-basis generator)."""
        if self.degree == 1:
            # x mod Phi_N: N=1 gives 1, N=2 gives -1
            return FieldElement(self, (mpq(1) if self.order == 1 else mpq(-1),))
        c = [_QZERO] * self.degree
        c[1] = _QONE
        return FieldElement(self, tuple(c))

    def descriptor(self):
        return {"kind": "cyclotomic", "order": self.order}

    def serialize_raw(self, a):
        return [_qstr(c) for c in a]

    def parse_raw(self, data, location=""):
        if len(data) != self.degree:
            raise ParseError(f"expected {self.degree} coefficients, got {len(data)}", location)
        return tuple(_qparse(c, location) for c in data)

    def short_name(self):
        return f"Q(zeta_{self.order})"

    def __eq__(self, other):
        return isinstance(other, CyclotomicField) and other.order == self.order

    def __hash__(self):
        return hash(("cyclotomic", self.order))


class FiniteField(FieldHandle):
    """F_{l^k} as F_l[x]/(modulus); elements are int tuples of length k."""

    kind = "finite"

    def __init__(self, ell, k, modulus=None):
        if not is_prime(ell) or ell == 2:
            raise InvalidCharacteristic(f"characteristic must be an odd prime, got {ell}")
        if k < 1:
            raise ValueError("extension degree must be >= 1")
        self.ell = ell
        self.k = k
        self.q = ell**k
        if modulus is None:
            modulus = _smallest_irreducible(ell, k)
        else:
            modulus = tuple(int(c) % ell for c in modulus)
            if len(modulus) != k or not _is_irreducible(list(modulus) + [1], ell):
                raise ValueError("modulus must be a monic irreducible of degree k (given as k low coefficients)")
        self.modulus = modulus  # low k coefficients of the monic degree-k modulus
        self.degree = k
        self.zero = (0,) * k
        self.one = (1,) + (0,) * (k - 1)
        self._primitive_root = None

    def add(self, a, b):
        ell = self.ell
        return tuple((x + y) % ell for x, y in zip(a, b))

    def sub(self, a, b):
        ell = self.ell
        return tuple((x - y) % ell for x, y in zip(a, b))

    def neg(self, a):
        ell = self.ell
        return tuple(-x % ell for x in a)

    def mul(self, a, b):
        ell, k = self.ell, self.k
        if k == 1:
            return (a[0] * b[0] % ell,)
        prod = [0] * (2 * k - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    prod[i + j] += ai * bj
        # reduce x^k = -modulus
        for t in range(2 * k - 2, k - 1, -1):
            c = prod[t] % ell
            if c:
                for j, mj in enumerate(self.modulus):
                    prod[t - k + j] -= c * mj
        return tuple(c % ell for c in prod[:k])

    def inv(self, a):
        if self.is_zero(a):
            raise ZeroDivisionError("inverse of zero")
        ell, k = self.ell, self.k
        if k == 1:
            return (pow(a[0], ell - 2, ell),)
        # extended Euclid in F_l[x]
        mod = list(self.modulus) + [1]
        r0, r1 = mod, [c for c in a]
        while r1 and r1[-1] == 0:
            r1.pop()
        s0, s1 = [], [1]
        while True:
            q, rem = _fpdivmod(r0, r1, ell)
            if not rem:
                break
            s0, s1 = s1, _fpsub(s0, _fpmul(q, s1, ell), ell)
            r0, r1 = r1, rem
        assert len(r1) == 1
        lcinv = pow(r1[0], ell - 2, ell)
        out = [c * lcinv % ell for c in s1]
        out += [0] * (k - len(out))
        return tuple(out[:k])

    def from_int(self, n):
        return (n % self.ell,) + (0,) * (self.k - 1)

    def from_rational(self, q):
        num, den = _qnumden(q)
        if den % self.ell == 0:
            raise NotIntegralAtPrime(f"denominator {den} divisible by {self.ell}")
        return self.mul(self.from_int(num), self.inv(self.from_int(den)))

    def validate_raw(self, coeffs):
        out = tuple(int(c) for c in coeffs)
        if any(c < 0 or c >= self.ell for c in out):
            raise ValueError(f"coefficients must lie in [0, {self.ell})")
        return out

    def elements(self):
        """All q elements in low-degree-first order."""
        for m in range(self.q):
            c, digits = m, []
            for _ in range(self.k):
                digits.append(c % self.ell)
                c //= self.ell
            yield tuple(digits)

    def primitive_root(self):
        """The element of multiplicative order q-1 with the smallest representation
        (coefficients compared low-degree-first); deterministic across runs."""
        if self._primitive_root is None:
            target = self.q - 1
            primes = list(factorize(target))
            for cand in self.elements():
                if self.is_zero(cand):
                    continue
                if all(self._pow_raw(cand, target // p) != self.one for p in primes):
                    self._primitive_root = cand
                    break
            else:  # pragma: no cover
                raise AssertionError("no primitive root found")
        return self._primitive_root

    def _pow_raw(self, a, e):
        acc, base = self.one, a
        e = int(e)
        while e:
            if e & 1:
                acc = self.mul(acc, base)
            base = self.mul(base, base)
            e >>= 1
        return acc

    def raw_order(self, a):
        """Exact multiplicative order (divides q-1)."""
        order = self.q - 1
        for p in factorize(order):
            while order % p == 0 and self._pow_raw(a, order // p) == self.one:
                order //= p
        return order

    def descriptor(self):
        return {"kind": "finite", "l": self.ell, "k": self.k, "modulus": list(self.modulus)}

    def serialize_raw(self, a):
        return [int(c) for c in a]

    def parse_raw(self, data, location=""):
        if len(data) != self.k:
            raise ParseError(f"expected {self.k} coefficients, got {len(data)}", location)
        try:
            return self.validate_raw(data)
        except (ValueError, TypeError) as e:
            raise ParseError(str(e), location)

    def short_name(self):
        return f"F_{self.q}"

    def __eq__(self, other):
        return (
            isinstance(other, FiniteField)
            and other.ell == self.ell
            and other.k == self.k
            and other.modulus == self.modulus
        )

    def __hash__(self):
        return hash(("finite", self.ell, self.k, self.modulus))


# rational helpers ----------------------------------------------------------

def _qnumden(q):
    return int(q.numerator), int(q.denominator)


def _qstr(q):
    num, den = _qnumden(q)
    return str(num) if den == 1 else f"{num}/{den}"


def _qparse(s, location=""):
    try:
        if isinstance(s, int):
            return mpq(s)
        return mpq(str(s))
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"bad rational {s!r}", location)


# polynomial helpers over mpq (low-to-high lists, trimmed) ------------------

def _ptrim(p):
    while p and p[-1] == 0:
        p.pop()
    return p


def _psub(a, b):
    n = max(len(a), len(b))
    out = [(a[i] if i < len(a) else _QZERO) - (b[i] if i < len(b) else _QZERO) for i in range(n)]
    return _ptrim(out)


def _pmul(a, b):
    if not a or not b:
        return []
    out = [_QZERO] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
    return _ptrim(out)


def _pdivmod(a, b):
    a = list(a)
    q = [_QZERO] * max(0, len(a) - len(b) + 1)
    inv_lc = 1 / mpq(b[-1])
    for i in range(len(q) - 1, -1, -1):
        c = a[i + len(b) - 1] * inv_lc
        q[i] = c
        if c:
            for j, bj in enumerate(b):
                a[i + j] -= c * bj
    return _ptrim(q), _ptrim(a)


# polynomial helpers over F_l (low-to-high int lists, trimmed) --------------

def _fptrim(p):
    while p and p[-1] == 0:
        p.pop()
    return p


def _fpsub(a, b, ell):
    n = max(len(a), len(b))
    out = [((a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0)) % ell for i in range(n)]
    return _fptrim(out)


def _fpmul(a, b, ell):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % ell
    return _fptrim(out)


def _fpdivmod(a, b, ell):
    a = list(a)
    q = [0] * max(0, len(a) - len(b) + 1)
    inv_lc = pow(b[-1], ell - 2, ell)
    for i in range(len(q) - 1, -1, -1):
        c = a[i + len(b) - 1] * inv_lc % ell
        q[i] = c
        if c:
            for j, bj in enumerate(b):
                a[i + j] = (a[i + j] - c * bj) % ell
    return _fptrim(q), _fptrim(a)


def _fppowmod(base, e, mod, ell):
    # base^e mod (mod) over F_l[x]
    acc = [1]
    base = _fpdivmod(base, mod, ell)[1]
    while e:
        if e & 1:
            acc = _fpdivmod(_fpmul(acc, base, ell), mod, ell)[1]
        base = _fpdivmod(_fpmul(base, base, ell), mod, ell)[1]
        e >>= 1
    return acc


def _fpgcd(a, b, ell):
    a, b = list(a), list(b)
    while b:
        a, b = b, _fpdivmod(a, b, ell)[1]
    return a


def _is_irreducible(poly, ell):
    """Monic poly (low-to-high int list) irreducible over F_l."""
    k = len(poly) - 1
    if k == 1:
        return True
    x = [0, 1]
    # x^(l^k) == x mod poly
    if _fpsub(_fppowmod(x, ell**k, poly, ell), x, ell):
        return False
    for p in factorize(k):
        g = _fpgcd(poly, _fpsub(_fppowmod(x, ell ** (k // p), poly, ell), x, ell), ell)
        if len(g) != 1:
            return False
    return True


def _smallest_irreducible(ell, k):
    """Low k coefficients of the lexicographically smallest monic irreducible of degree k
    over F_l (coefficients compared low-degree-first)."""
    if k == 1:
        return (0,)  # x itself
    for m in range(ell**k):
        c, digits = m, []
        for _ in range(k):
            digits.append(c % ell)
            c //= ell
        if _is_irreducible(digits + [1], ell):
            return tuple(digits)
    raise AssertionError("unreachable")  # pragma: no cover


# ---------------------------------------------------------------------------
# public constructors

_RATIONAL = RationalField()


def rational_field():
    return _RATIONAL


@functools.lru_cache(maxsize=None)
def make_cyclotomic_field(order):
    """Q(zeta_order); the modulus is Phi_order computed exactly."""
    return CyclotomicField(order)


@functools.lru_cache(maxsize=None)
def make_finite_field(ell, k):
    """F_{l^k} with the deterministic smallest irreducible modulus; l must be an odd prime."""
    return FiniteField(ell, k)


def field_from_descriptor(desc, location="field"):
    try:
        kind = desc["kind"]
        if kind == "rational":
            return _RATIONAL
        if kind == "cyclotomic":
            return make_cyclotomic_field(int(desc["order"]))
        if kind == "finite":
            f = FiniteField(int(desc["l"]), int(desc["k"]), tuple(desc["modulus"]))
            canonical = make_finite_field(f.ell, f.k)
            return canonical if canonical == f else f
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"bad field descriptor: {e}", location)
    raise ParseError(f"unknown field kind {desc.get('kind')!r}", location)


# ---------------------------------------------------------------------------
# roots of unity

def root_of_unity(field, order, exponent=1):
    """zeta_order**exponent in the given field.

    Cyclotomic: zeta_order := zeta_N^(N/order), so zeta_d = zeta_n^(n/d) compatibility
    holds by construction.  Finite: zeta_order := g^((q-1)/order) for the fixed
    primitive root g.
    """
    if order < 1:
        raise OrderUnavailable("order must be positive")
    if field.kind == "cyclotomic":
        if field.order % order != 0:
            raise OrderUnavailable(f"{order} does not divide {field.order}")
        gen = field.generator()
        return gen ** ((field.order // order) * (exponent % order))
    if field.kind == "finite":
        if (field.q - 1) % order != 0:
            raise OrderUnavailable(f"{order} does not divide {field.q - 1}")
        g = FieldElement(field, field.primitive_root())
        return g ** (((field.q - 1) // order) * (exponent % order))
    if field.kind == "rational":
        if order not in (1, 2):
            raise OrderUnavailable(f"Q contains no root of unity of order {order}")
        return field.element(1 if order == 1 or exponent % 2 == 0 else -1)
    raise TypeError(f"unsupported field kind {field.kind}")


def multiplicative_order(x, bound=None):
    """Exact multiplicative order of x, or None if it exceeds the bound.

    Finite fields are computed exactly via the factorization of q-1; elsewhere by
    iterated multiplication up to the bound (required there).
    """
    if x.is_zero():
        raise ValueError("zero has no multiplicative order")
    f = x.field
    if f.kind == "finite":
        order = f.raw_order(x.coeffs)
        return order if bound is None or order <= bound else None
    if bound is None:
        raise ValueError("a bound is required outside finite fields")
    acc = x
    for n in range(1, bound + 1):
        if acc.is_one():
            return n
        acc = acc * x
    return None


# ---------------------------------------------------------------------------
# residue maps

class ResidueMap:
    """Ring homomorphism on l-integral elements of Q(zeta_N) onto F_{l^k},
    zeta_N -> image_of_root (an element of exact multiplicative order N)."""

    def __init__(self, source, target, image_of_root):
        self.source = source
        self.target = target
        self.image_of_root = image_of_root
        self.ell = target.ell
        # verified invariants
        assert target.raw_order(image_of_root.coeffs) == source.order or source.order == 1
        assert _phi_vanishes(source, image_of_root)

    def apply(self, x):
        return apply_residue(self, x)

    def __repr__(self):
        return f"<ResidueMap {self.source.short_name()} -> {self.target.short_name()}>"


def _phi_vanishes(source, img):
    f = img.field
    acc = f.element(0)
    p = f.element(1)
    for c in source.modulus:
        acc = acc + p * c
        p = p * img
    return acc.is_zero()


def make_residue_map(source, ell, k=None):
    """Residue map Q(zeta_N) -> F_{l^k}; f = ord(l mod N) is the minimal degree and k
    must be a multiple of it (defaults to f).  image_of_root is the smallest power of
    the fixed primitive root with multiplicative order N annihilating Phi_N."""
    if source.kind != "cyclotomic":
        raise TypeError("residue maps start from cyclotomic fields")
    n = source.order
    if n % ell == 0:
        raise RamifiedPrime(f"{ell} divides {n}")
    f = multiplicative_order_int(ell, n)
    if k is None:
        k = f
    if k % f != 0:
        raise ResidueFieldTooSmall(f"need a multiple of {f}, got {k}")
    target = make_finite_field(ell, k)
    g = target.primitive_root()
    qm1 = target.q - 1
    image = None
    for e in range(1, qm1 + 1):
        if qm1 // _gcd(e, qm1) != n:
            continue
        cand = FieldElement(target, target._pow_raw(g, e))
        if _phi_vanishes(source, cand):
            image = cand
            break
    if image is None and n == 1:
        image = target.element(1)
    assert image is not None, "no admissible root image (impossible for N | q-1)"
    return ResidueMap(source, target, image)


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


def apply_residue(rmap, x):
    """Image of x under the residue map; raises NotIntegralAtPrime on an l-divisible
    denominator.  Ring homomorphism on l-integral elements."""
    f = x.field
    if f.kind == "rational":
        return rmap.target.element(rmap.target.from_rational(x.coeffs[0]))
    if f != rmap.source:
        raise TypeError(f"element of {f.short_name()} does not match map source {rmap.source.short_name()}")
    t = rmap.target
    acc = t.zero
    p = t.one
    img = rmap.image_of_root.coeffs
    for c in x.coeffs:
        if c:
            acc = t.add(acc, t.mul(t.from_rational(c), p))
        p = t.mul(p, img)
    return FieldElement(t, acc)


# ---------------------------------------------------------------------------
# embeddings / restrictions used by Jordan analysis over extensions

@functools.lru_cache(maxsize=None)
def _finite_embedding_image(source, target):
    # image of the source power-basis generator: the smallest root of the source
    # modulus inside the target (low-degree-first enumeration -> deterministic)
    mod = list(source.modulus) + [1]
    for cand in target.elements():
        acc, p = target.zero, target.one
        for c in mod:
            if c:
                acc = target.add(acc, target.mul(target.from_int(c), p))
            p = target.mul(p, cand)
        if acc == target.zero:
            return cand
    raise ValueError(f"{source.short_name()} does not embed into {target.short_name()}")


def embed_finite(x, target):
    """Canonical embedding F_{l^k} -> F_{l^(k*m)} (source modulus root with the smallest
    representation in the target)."""
    src = x.field
    if src == target:
        return x
    if src.kind != "finite" or target.kind != "finite" or src.ell != target.ell or target.k % src.k != 0:
        raise TypeError(f"no embedding {src.short_name()} -> {target.short_name()}")
    if src.k == 1:
        return target.element(target.from_int(x.coeffs[0]))
    img = _finite_embedding_image(src, target)
    acc, p = target.zero, target.one
    for c in x.coeffs:
        if c:
            acc = target.add(acc, target.mul(target.from_int(c), p))
        p = target.mul(p, img)
    return FieldElement(target, acc)


def cyclotomic_to_subfield(x, target):
    """Rewrite an element of Q(zeta_N) in Q(zeta_M), M | N, when its coordinates lie in
    that subfield; raises ValueError otherwise."""
    src = x.field
    if src == target:
        return x
    if src.kind != "cyclotomic" or target.kind != "cyclotomic" or src.order % target.order != 0:
        raise TypeError(f"{target.short_name()} is not a subfield of {src.short_name()}")
    # columns: zeta_M^j expressed in the source power basis
    gen = root_of_unity(src, target.order, 1)
    cols = []
    p = src.element(1)
    for _ in range(target.degree):
        cols.append(p.coeffs)
        p = p * gen
    # solve sum_j c_j * cols[j] = x by Gaussian elimination on the (deg_src x deg_tgt) system
    rows = [[cols[j][i] for j in range(target.degree)] + [x.coeffs[i]] for i in range(src.degree)]
    sol = _solve_exact(rows, target.degree)
    if sol is None:
        raise ValueError(f"element does not lie in {target.short_name()}")
    return target.element(sol)


def _solve_exact(rows, ncols):
    # tiny dense rational solver for an overdetermined consistent system; returns the
    # unique solution or None if inconsistent (columns are independent for our callers)
    m = len(rows)
    piv = []
    r = 0
    for c in range(ncols):
        pr = next((i for i in range(r, m) if rows[i][c] != 0), None)
        if pr is None:
            return None
        rows[r], rows[pr] = rows[pr], rows[r]
        pv = rows[r][c]
        rows[r] = [v / pv for v in rows[r]]
        for i in range(m):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [v - f * w for v, w in zip(rows[i], rows[r])]
        piv.append(c)
        r += 1
    if any(any(v != 0 for v in rows[i][:-1]) or rows[i][-1] != 0 for i in range(r, m)):
        return None
    return tuple(rows[i][-1] for i in range(ncols))
