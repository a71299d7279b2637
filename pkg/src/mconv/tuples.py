"""Monodromy tuples: (r+1) invertible matrices with product identity, the rank-2
construction over Q(zeta_N), rank-one twist patterns, per-entry census and local
self-duality analysis, JSON round trip.

Entry indices are 1-based in all reports and error messages (index r+1 is the point
at infinity); internally the entries list is 0-based."""

from __future__ import annotations

import json

from .errors import (
    ArityMismatch,
    ConditionAViolated,
    InvalidM,
    ParseError,
    ProductRelationViolated,
    SingularEntry,
)
from .fields import (
    FieldElement,
    euler_phi,
    field_from_descriptor,
    make_cyclotomic_field,
    rational_field,
    root_of_unity,
)
from .linalg import (
    ExactMatrix,
    SingularMatrix,
    inverse,
    determinant,
    jordan_data,
    matrix_from_json,
    rank,
)

# -1 positions (1-based, anchored to the right end) of the named twist patterns
TWIST_POSITIONS = {
    "N1": lambda r: (r - 2, r),
    "N2": lambda r: (r - 1, r + 1),
    "N3": lambda r: (r - 3, r - 2),
    "N4": lambda r: (r - 1, r + 1),
    "N5": lambda r: (r - 3, r),
    "L5": lambda r: (r, r + 1),
}


class MonodromyTuple:
    """(T_1, ..., T_r, T_{r+1}) with the product relation T_1 ... T_{r+1} = 1."""

    __slots__ = ("field", "n", "r", "entries", "labels")

    def __init__(self, field, entries, labels=None):
        entries = list(entries)
        assert entries, "a tuple needs at least one entry"
        self.field = field
        self.entries = entries
        self.n = entries[0].rows
        self.r = len(entries) - 1
        self.labels = list(labels) if labels is not None else None

    def finite_entries(self):
        return self.entries[: self.r]

    def infinity_entry(self):
        return self.entries[self.r]

    def entry(self, i):
        """1-based access, i = 1..r+1."""
        return self.entries[i - 1]

    def __eq__(self, other):
        if not isinstance(other, MonodromyTuple):
            return NotImplemented
        return self.field == other.field and self.entries == other.entries

    def __repr__(self):
        return f"MonodromyTuple(n={self.n}, r={self.r}, {self.field.short_name()})"

    def to_json_dict(self):
        doc = {
            "field": self.field.descriptor(),
            "n": self.n,
            "r": self.r,
            "entries": [m.to_json_dict() for m in self.entries],
        }
        if self.labels is not None:
            doc["labels"] = self.labels
        return doc


class RankOneTuple:
    """r+1 nonzero scalars with product 1: the tuple avatar of a rank-one twist."""

    __slots__ = ("field", "r", "scalars")

    def __init__(self, field, scalars):
        scalars = [field.element(s) for s in scalars]
        prod = field.element(1)
        for s in scalars:
            prod = prod * s
        if not prod.is_one():
            raise ProductRelationViolated(f"rank-one scalars multiply to {prod.serialize()}, not 1")
        self.field = field
        self.r = len(scalars) - 1
        self.scalars = scalars

    def to_json_dict(self):
        return {
            "field": self.field.descriptor(),
            "r": self.r,
            "scalars": [s.serialize() for s in self.scalars],
        }

    def __eq__(self, other):
        if not isinstance(other, RankOneTuple):
            return NotImplemented
        return self.field == other.field and self.scalars == other.scalars

    def __repr__(self):
        signs = ",".join("/".join(map(str, s.serialize())) for s in self.scalars)
        return f"RankOneTuple(r={self.r}, [{signs}])"


class EntryCensus:
    """Per-entry determinant / order / rank data with the derived reflection flags."""

    __slots__ = ("records",)

    def __init__(self, records):
        self.records = records  # list of dicts, one per entry, index 1-based

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, i):
        return self.records[i]

    def bireflections(self):
        return [rec for rec in self.records if rec["is_bireflection"]]

    def negated_reflections(self):
        return [rec for rec in self.records if rec["is_negated_reflection"]]

    def to_json(self):
        out = []
        for rec in self.records:
            r = dict(rec)
            r["determinant"] = rec["determinant"].serialize()
            out.append(r)
        return out


# ---------------------------------------------------------------------------

def validate(t):
    """Assert invertibility of every entry and the product relation."""
    prod = ExactMatrix.identity(t.field, t.n)
    for i, m in enumerate(t.entries, start=1):
        if m.rows != m.cols or m.rows != t.n or m.field != t.field:
            raise SingularEntry(i)
        try:
            inverse(m)
        except SingularMatrix:
            raise SingularEntry(i)
        prod = prod * m
    if not prod.is_identity():
        raise ProductRelationViolated("entry product is not the identity", residual=prod)
    return True


def construct_T(m, r):
    """The rank-2 tuple over Q(zeta_N), N = lcm(4, m, 2):

    T_i = diag(lambda_i, lambda_i^-1) for i <= r-3, where the first 2*phi(m) values
    run twice through the primitive powers of zeta_m (ascending exponents, two
    consecutive passes) and the rest are -1; then diag(1,-1), the swap, the forced
    T_r = -(T_1...T_{r-1})^-1, and -identity at infinity."""
    if m <= 2:
        raise InvalidM(f"m must be > 2, got {m}")
    phi = euler_phi(m)
    if not 2 * phi < r - 4:
        raise ConditionAViolated(f"need 2*phi(m) < r - 4: 2*{phi} >= {r} - 4")
    n_field = _lcm(_lcm(4, m), 2)
    field = make_cyclotomic_field(n_field)
    units = [d for d in range(1, m + 1) if _gcd(d, m) == 1]
    lams = []
    for _ in range(2):
        lams.extend(root_of_unity(field, m, d) for d in units)
    minus_one = field.element(-1)
    lams.extend([minus_one] * (r - 3 - 2 * phi))
    entries = [ExactMatrix.diagonal(field, [lam, lam.inverse()]) for lam in lams]
    entries.append(ExactMatrix.diagonal(field, [field.element(1), minus_one]))
    one, zero = field.element(1), field.element(0)
    entries.append(ExactMatrix(field, [[zero, one], [one, zero]]))
    prod = ExactMatrix.identity(field, 2)
    for e in entries:
        prod = prod * e
    entries.append(inverse(prod).scale(minus_one))
    entries.append(ExactMatrix.identity(field, 2).scale(minus_one))
    t = MonodromyTuple(field, entries)
    validate(t)
    return t


def construct_rank_one(pattern, r, field=None):
    """Sign tuple of length r+1: a named pattern (N1..N5, L5, -1 at the right-anchored
    positions) or an explicit sign vector (product must be 1)."""
    if field is None:
        field = rational_field()
    if isinstance(pattern, str):
        key = pattern.upper()
        if key not in TWIST_POSITIONS:
            raise ValueError(f"unknown pattern {pattern!r}")
        if r < 6:
            raise ValueError(f"pattern {key} needs r >= 6, got {r}")
        neg = set(TWIST_POSITIONS[key](r))
        scalars = [-1 if i in neg else 1 for i in range(1, r + 2)]
    else:
        scalars = list(pattern)
        if len(scalars) != r + 1:
            raise ArityMismatch(f"expected {r + 1} scalars, got {len(scalars)}")
    return RankOneTuple(field, scalars)


def tensor_rank_one(t, c):
    """Entrywise scalar twist c_i * T_i; the product relation is preserved."""
    if c.r != t.r:
        raise ArityMismatch(f"tuple has r={t.r}, rank-one has r={c.r}")
    entries = []
    for m, s in zip(t.entries, c.scalars):
        entries.append(m.scale(t.field.element(s)))
    out = MonodromyTuple(t.field, entries, labels=t.labels)
    validate(out)
    return out


def entry_census(t, order_bound=None):
    """Determinant, multiplicative order (None = exceeds bound), rank(T -/+ 1) and the
    derived reflection flags for every entry."""
    if order_bound is None:
        order_bound = 4 * max(4, t.n, t.r)
    ident = ExactMatrix.identity(t.field, t.n)
    records = []
    for i, m in enumerate(t.entries, start=1):
        det = determinant(m)
        rk_minus = rank(m - ident)
        rk_plus = rank(m + ident)
        records.append(
            {
                "index": i,
                "determinant": det,
                "order": _matrix_order(m, ident, order_bound),
                "rank_minus_one": rk_minus,
                "rank_plus_one": rk_plus,
                "is_reflection": rk_minus == 1,
                "is_bireflection": rk_minus == 2,
                "is_negated_reflection": rk_plus == 1,
                "is_scalar": m.is_scalar(),
            }
        )
    return EntryCensus(records)


def _matrix_order(m, ident, bound):
    acc = m
    for k in range(1, bound + 1):
        if acc == ident:
            return k
        acc = acc * m
    return None


def local_selfdual_check(t, eigenvalue_orders):
    """Per entry: is its Jordan multiset invariant under eigenvalue inversion?"""
    return [jordan_data(m, eigenvalue_orders).is_selfdual() for m in t.entries]


# ---------------------------------------------------------------------------
# serialization

def tuple_to_json(t):
    return t.to_json_dict()


def tuple_from_json(doc, location="tuple"):
    try:
        field = field_from_descriptor(doc["field"], location=f"{location}.field")
        n, r = int(doc["n"]), int(doc["r"])
        entries_doc = doc["entries"]
        if len(entries_doc) != r + 1:
            raise ParseError(f"expected {r + 1} entries, got {len(entries_doc)}", location)
        entries = [
            matrix_from_json(e, location=f"{location}.entries[{i}]") for i, e in enumerate(entries_doc)
        ]
        labels = doc.get("labels")
    except ParseError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"bad tuple document: {e}", location)
    for i, m in enumerate(entries):
        if m.rows != n or m.cols != n or m.field != field:
            raise ParseError(f"entry {i} has wrong shape or field", location)
    return MonodromyTuple(field, entries, labels=labels)


def serialize(t):
    """Canonical JSON bytes (accepted back by deserialize exactly)."""
    return json.dumps(t.to_json_dict(), sort_keys=True, indent=1).encode()


def deserialize(data):
    try:
        doc = json.loads(data.decode() if isinstance(data, (bytes, bytearray)) else data)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise ParseError(f"not valid JSON: {e}", location="document")
    return tuple_from_json(doc)


def rank_one_from_json(doc, location="rank_one"):
    try:
        field = field_from_descriptor(doc["field"], location=f"{location}.field")
        r = int(doc["r"])
        scalars = [
            FieldElement(field, field.parse_raw(s, location=f"{location}.scalars[{i}]"))
            for i, s in enumerate(doc["scalars"])
        ]
    except ParseError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"bad rank-one document: {e}", location)
    if len(scalars) != r + 1:
        raise ParseError(f"expected {r + 1} scalars, got {len(scalars)}", location)
    return RankOneTuple(field, scalars)


# ---------------------------------------------------------------------------

def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


def _lcm(a, b):
    return a * b // _gcd(a, b)
