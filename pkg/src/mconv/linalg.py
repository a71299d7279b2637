"""Dense exact linear algebra over any field handle: echelon forms, kernels, inverses,
characteristic polynomials, Jordan data, quotient actions, simultaneous conjugacy.

Matrices are immutable; the row-reduction kernels work on raw coefficient tuples for
speed.  Prime-field systems above a size threshold are routed through the numpy mod-p
kernel (identical results: RREF is canonical)."""

from __future__ import annotations

import json

from . import _modp
from .errors import EigenvalueOutsideField, NotInvariant, SingularMatrix
from .fields import FieldElement, divisors, root_of_unity

_MODP_MIN_CELLS = 4096


class ExactMatrix:
    """Dense matrix over a field handle.  Rows of raw coefficient tuples internally."""

    __slots__ = ("field", "rows", "cols", "_data")

    def __init__(self, field, data, _raw=False):
        self.field = field
        if _raw:
            self._data = tuple(tuple(row) for row in data)
        else:
            self._data = tuple(
                tuple(field.element(x).coeffs for x in row) for row in data
            )
        self.rows = len(self._data)
        self.cols = len(self._data[0]) if self.rows else 0
        assert all(len(r) == self.cols for r in self._data)

    # construction ----------------------------------------------------------

    @classmethod
    def identity(cls, field, n):
        z, o = field.zero, field.one
        return cls(field, [[o if i == j else z for j in range(n)] for i in range(n)], _raw=True)

    @classmethod
    def zero(cls, field, rows, cols):
        z = field.zero
        return cls(field, [[z] * cols for _ in range(rows)], _raw=True)

    @classmethod
    def diagonal(cls, field, entries):
        entries = [field.element(e) for e in entries]
        n = len(entries)
        z = field.zero
        return cls(field, [[entries[i].coeffs if i == j else z for j in range(n)] for i in range(n)], _raw=True)

    # access ------------------------------------------------------------------

    def entry(self, i, j):
        return FieldElement(self.field, self._data[i][j])

    def raw(self):
        return self._data

    def row_elements(self, i):
        return [FieldElement(self.field, c) for c in self._data[i]]

    # arithmetic --------------------------------------------------------------

    def __mul__(self, other):
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        assert self.field == other.field and self.cols == other.rows
        f = self.field
        bt = list(zip(*other._data))  # columns of other
        out = []
        mul, add, zero = f.mul, f.add, f.zero
        for row in self._data:
            orow = []
            for col in bt:
                acc = zero
                for a, b in zip(row, col):
                    if a != zero and b != zero:
                        acc = add(acc, mul(a, b))
                orow.append(acc)
            out.append(orow)
        return ExactMatrix(f, out, _raw=True)

    def __add__(self, other):
        assert isinstance(other, ExactMatrix) and self.field == other.field
        f = self.field
        return ExactMatrix(
            f,
            [[f.add(a, b) for a, b in zip(ra, rb)] for ra, rb in zip(self._data, other._data)],
            _raw=True,
        )

    def __sub__(self, other):
        assert isinstance(other, ExactMatrix) and self.field == other.field
        f = self.field
        return ExactMatrix(
            f,
            [[f.sub(a, b) for a, b in zip(ra, rb)] for ra, rb in zip(self._data, other._data)],
            _raw=True,
        )

    def __neg__(self):
        f = self.field
        return ExactMatrix(f, [[f.neg(a) for a in row] for row in self._data], _raw=True)

    def scale(self, c):
        c = self.field.element(c)
        f = self.field
        return ExactMatrix(f, [[f.mul(c.coeffs, a) for a in row] for row in self._data], _raw=True)

    def transpose(self):
        return ExactMatrix(self.field, list(zip(*self._data)), _raw=True)

    def apply(self, vec):
        """Matrix-vector product on a raw coefficient-tuple vector."""
        f = self.field
        out = []
        for row in self._data:
            acc = f.zero
            for a, v in zip(row, vec):
                if a != f.zero and v != f.zero:
                    acc = f.add(acc, f.mul(a, v))
            out.append(acc)
        return out

    def is_identity(self):
        f = self.field
        return self.rows == self.cols and all(
            self._data[i][j] == (f.one if i == j else f.zero)
            for i in range(self.rows)
            for j in range(self.cols)
        )

    def is_scalar(self):
        if self.rows != self.cols or self.rows == 0:
            return False
        f = self.field
        d = self._data[0][0]
        return all(
            self._data[i][j] == (d if i == j else f.zero)
            for i in range(self.rows)
            for j in range(self.cols)
        )

    def __eq__(self, other):
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        return self.field == other.field and self._data == other._data

    def __hash__(self):
        return hash((self.field, self._data))

    def __repr__(self):
        return f"ExactMatrix({self.field.short_name()}, {self.rows}x{self.cols})"

    # serialization -------------------------------------------------------------

    def to_json_dict(self):
        f = self.field
        return {
            "field": f.descriptor(),
            "rows": self.rows,
            "cols": self.cols,
            "entries": [[f.serialize_raw(a) for a in row] for row in self._data],
        }


def matrix_from_json(doc, location="matrix"):
    from .errors import ParseError
    from .fields import field_from_descriptor

    try:
        f = field_from_descriptor(doc["field"], location=f"{location}.field")
        rows, cols = int(doc["rows"]), int(doc["cols"])
        entries = doc["entries"]
        if len(entries) != rows or any(len(r) != cols for r in entries):
            raise ParseError("entry grid does not match dimensions", location)
        data = [
            [f.parse_raw(entries[i][j], location=f"{location}.entries[{i}][{j}]") for j in range(cols)]
            for i in range(rows)
        ]
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"bad matrix document: {e}", location)
    return ExactMatrix(f, data, _raw=True)


# ---------------------------------------------------------------------------
# row reduction

def _rref_raw(field, rows):
    """In-place RREF of a list of raw rows; returns (rows, pivot_cols)."""
    m = len(rows)
    n = len(rows[0]) if m else 0
    if (
        field.kind == "finite"
        and field.k == 1
        and m * n >= _MODP_MIN_CELLS
    ):
        red, piv = _modp.rref_mod([[c[0] for c in row] for row in rows], field.ell)
        out = [tuple((int(v),) for v in row) for row in red]
        out += [tuple(field.zero for _ in range(n)) for _ in range(m - len(out))]
        return out, list(piv)
    zero = field.zero
    piv = []
    r = 0
    for c in range(n):
        if r == m:
            break
        pr = next((i for i in range(r, m) if rows[i][c] != zero), None)
        if pr is None:
            continue
        if pr != r:
            rows[r], rows[pr] = rows[pr], rows[r]
        pv = field.inv(rows[r][c])
        if pv != field.one:
            mul = field.mul
            rows[r] = [x if x == zero else mul(pv, x) for x in rows[r]]
        prow = rows[r]
        sub, mul = field.sub, field.mul
        for i in range(m):
            if i != r and rows[i][c] != zero:
                f0 = rows[i][c]
                ri = rows[i]
                rows[i] = [
                    x if y == zero else sub(x, mul(f0, y)) for x, y in zip(ri, prow)
                ]
        piv.append(c)
        r += 1
    return rows, piv


def rref(mat):
    """(RREF matrix, rank, pivot columns) by exact Gauss-Jordan with partial pivoting
    on the first nonzero entry."""
    rows = [list(r) for r in mat.raw()]
    rows, piv = _rref_raw(mat.field, rows)
    return ExactMatrix(mat.field, rows, _raw=True), len(piv), piv


class Subspace:
    """Subspace given by a canonical reduced-row-echelon basis.

    Two subspaces are equal iff their echelon bases are entrywise equal."""

    __slots__ = ("ambient_dim", "basis", "pivots")

    def __init__(self, ambient_dim, basis, pivots):
        self.ambient_dim = ambient_dim
        self.basis = basis  # ExactMatrix, rows = echelon basis (may have 0 rows)
        self.pivots = tuple(pivots)

    @classmethod
    def from_vectors(cls, field, ambient_dim, vectors):
        """Canonical subspace spanned by raw coefficient-tuple vectors."""
        vecs = [list(v) for v in vectors]
        if not vecs:
            return cls(ambient_dim, ExactMatrix(field, [], _raw=True), ())
        red, piv = _rref_raw(field, vecs)
        rows = red[: len(piv)]
        return cls(ambient_dim, ExactMatrix(field, rows, _raw=True), piv)

    @property
    def dim(self):
        return len(self.pivots)

    @property
    def field(self):
        return self.basis.field

    def reduce(self, vec):
        """Residual of a raw vector modulo the subspace (one pass: basis is RREF)."""
        f = self.field
        vec = list(vec)
        rows = self.basis.raw()
        for i, pc in enumerate(self.pivots):
            c = vec[pc]
            if c != f.zero:
                row = rows[i]
                vec = [x if y == f.zero else f.sub(x, f.mul(c, y)) for x, y in zip(vec, row)]
        return vec

    def contains(self, vec):
        f = self.field
        return all(x == f.zero for x in self.reduce(vec))

    def sum(self, other):
        assert self.ambient_dim == other.ambient_dim
        vecs = list(self.basis.raw()) + list(other.basis.raw())
        return Subspace.from_vectors(self.field, self.ambient_dim, vecs)

    def complement_columns(self):
        """Non-pivot coordinates, ascending: the canonical complement used by quotients."""
        pset = set(self.pivots)
        return [c for c in range(self.ambient_dim) if c not in pset]

    def __eq__(self, other):
        if not isinstance(other, Subspace):
            return NotImplemented
        return self.ambient_dim == other.ambient_dim and self.basis == other.basis

    def __hash__(self):
        return hash((self.ambient_dim, self.basis))

    def __repr__(self):
        return f"Subspace(dim {self.dim} of {self.ambient_dim})"


def kernel(mat):
    """Canonical echelonized right kernel; dim = cols - rank."""
    f = mat.field
    n = mat.cols
    if f.kind == "finite" and f.k == 1 and mat.rows * n >= _MODP_MIN_CELLS:
        basis = _modp.kernel_mod([[c[0] for c in row] for row in mat.raw()], f.ell)
        vecs = [tuple((int(v),) for v in row) for row in basis]
        piv = [next(j for j, v in enumerate(row) if v) for row in basis]  # already RREF
        return Subspace(n, ExactMatrix(f, vecs, _raw=True), piv)
    red, _, piv = rref(mat)
    pset = set(piv)
    free = [c for c in range(n) if c not in pset]
    vecs = []
    rraw = red.raw()
    for fc in free:
        v = [f.zero] * n
        v[fc] = f.one
        for i, pc in enumerate(piv):
            v[pc] = f.neg(rraw[i][fc])
        vecs.append(v)
    return Subspace.from_vectors(f, n, vecs)


def inverse(mat):
    """Exact inverse; raises SingularMatrix."""
    assert mat.rows == mat.cols
    f = mat.field
    n = mat.rows
    ident = ExactMatrix.identity(f, n).raw()
    rows = [list(r) + list(i) for r, i in zip(mat.raw(), ident)]
    rows, piv = _rref_raw(f, rows)
    if len(piv) != n or piv != list(range(n)):
        raise SingularMatrix(f"{n}x{n} matrix has rank {len(piv)}")
    return ExactMatrix(f, [row[n:] for row in rows], _raw=True)


def determinant(mat):
    """Exact determinant via elimination (tracks row swaps and pivot products)."""
    assert mat.rows == mat.cols
    f = mat.field
    n = mat.rows
    rows = [list(r) for r in mat.raw()]
    det = f.one
    for c in range(n):
        pr = next((i for i in range(c, n) if rows[i][c] != f.zero), None)
        if pr is None:
            return FieldElement(f, f.zero)
        if pr != c:
            rows[c], rows[pr] = rows[pr], rows[c]
            det = f.neg(det)
        pivot = rows[c][c]
        det = f.mul(det, pivot)
        pinv = f.inv(pivot)
        for i in range(c + 1, n):
            if rows[i][c] != f.zero:
                factor = f.mul(rows[i][c], pinv)
                rows[i] = [
                    x if y == f.zero else f.sub(x, f.mul(factor, y))
                    for x, y in zip(rows[i], rows[c])
                ]
    return FieldElement(f, det)


def rank(mat):
    return rref(mat)[1]


# ---------------------------------------------------------------------------
# characteristic polynomial (division-free, valid in every characteristic)

def char_poly(mat):
    """Coefficients (low to high, monic) of det(x*1 - M), by the Berkowitz method:
    no divisions, so correct over F_l for small l."""
    assert mat.rows == mat.cols
    f = mat.field
    n = mat.rows
    if n == 0:
        return [f.element(1)]
    a = mat.raw()
    # Berkowitz: iteratively build the char poly of leading principal submatrices.
    # poly stored low-to-high as raw coeffs
    poly = [f.neg(a[0][0]), f.one]
    for m in range(1, n):
        # row vector R = a[m][:m], column S = a[:m][m], corner am = a[m][m], block A = a[:m][:m]
        am = a[m][m]
        row = a[m][:m]
        col = [a[i][m] for i in range(m)]
        # Toeplitz coefficients c_0 = -1? use standard: c1 = am, c_{k} = R A^{k-2} S
        coeffs = [f.one, f.neg(am)]
        vec = col
        for _ in range(m):
            coeffs.append(f.neg(_dot(f, row, vec)))
            vec = _matvec_raw(f, a, vec, m)
        # multiply: newpoly[t] = sum_j coeffs[j] * oldpoly[t - 1 + j] with x-shift bookkeeping
        old = poly  # degree m, length m+1
        new = [f.zero] * (m + 2)
        # char_{m+1}(x) = sum_{j=0..m+1} coeffs[j] * x^{?}: standard Berkowitz column mult:
        # new = T * old where T is the Toeplitz lower-triangular with first column coeffs
        for t in range(m + 2):
            acc = f.zero
            for j in range(len(coeffs)):
                s = t - 1 + j  # old coefficient of degree t-1+j contributes via x^{...}
                if 0 <= s <= m and coeffs[j] != f.zero and old[s] != f.zero:
                    acc = f.add(acc, f.mul(coeffs[j], old[s]))
            new[t] = acc
        poly = new
    return [FieldElement(f, c) for c in poly]


def _dot(f, u, v):
    acc = f.zero
    for a, b in zip(u, v):
        if a != f.zero and b != f.zero:
            acc = f.add(acc, f.mul(a, b))
    return acc


def _matvec_raw(f, a, vec, m):
    out = []
    for i in range(m):
        acc = f.zero
        for j in range(m):
            if a[i][j] != f.zero and vec[j] != f.zero:
                acc = f.add(acc, f.mul(a[i][j], vec[j]))
        out.append(acc)
    return out


def eval_poly(coeffs, x):
    """Evaluate a coefficient list (low to high) at a field element."""
    acc = x.field.element(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


# ---------------------------------------------------------------------------
# Jordan data

class JordanData:
    """Multiset of (eigenvalue, block size, multiplicity), canonically sorted
    (eigenvalue serialization, then size descending)."""

    __slots__ = ("dim", "blocks")

    def __init__(self, dim, blocks):
        blocks = tuple(
            sorted(
                ((ev, int(size), int(mult)) for ev, size, mult in blocks),
                key=lambda b: (json.dumps(b[0].serialize()), -b[1]),
            )
        )
        assert sum(s * m for _, s, m in blocks) == dim
        assert len({(ev, s) for ev, s, _ in blocks}) == len(blocks), "duplicate (eigenvalue, size)"
        self.dim = dim
        self.blocks = blocks

    def eigenvalues(self):
        return sorted({ev for ev, _, _ in self.blocks}, key=lambda e: json.dumps(e.serialize()))

    def multiset(self):
        """{eigenvalue: {size: multiplicity}}"""
        out = {}
        for ev, s, m in self.blocks:
            d = out.setdefault(ev, {})
            d[s] = d.get(s, 0) + m
        return out

    def is_selfdual(self):
        """Invariant under eigenvalue -> eigenvalue^-1 (sizes and multiplicities kept)."""
        ms = self.multiset()
        return all(ms.get(ev.inverse()) == sizes for ev, sizes in ms.items())

    def algebraic_multiplicity(self, ev):
        return sum(s * m for e, s, m in self.blocks if e == ev)

    def to_json(self):
        return {
            "dim": self.dim,
            "blocks": [
                {"eigenvalue": ev.serialize(), "size": s, "multiplicity": m}
                for ev, s, m in self.blocks
            ],
        }

    def __eq__(self, other):
        if not isinstance(other, JordanData):
            return NotImplemented
        return self.dim == other.dim and self.blocks == other.blocks

    def __hash__(self):
        return hash((self.dim, self.blocks))

    def __repr__(self):
        parts = []
        for ev, s, m in self.blocks:
            tag = "/".join(str(x) for x in ev.serialize())
            parts.append(f"J{s}({tag})x{m}")
        return f"JordanData[{', '.join(parts)}]"


def candidate_roots_of_unity(field, eigenvalue_orders):
    """All roots of unity whose order lies in the divisor closure of the given orders
    and which exist in the field, deterministically ordered."""
    orders = set()
    for o in eigenvalue_orders:
        orders.update(divisors(o))
    cands = []
    seen = set()
    from .errors import OrderUnavailable

    for o in sorted(orders):
        try:
            base = root_of_unity(field, o, 1)
        except OrderUnavailable:
            continue
        for e in range(1, o + 1):
            if _gcd_int(e, o) == 1:
                z = base**e
                if z not in seen:
                    seen.add(z)
                    cands.append(z)
    return cands


def _gcd_int(a, b):
    while b:
        a, b = b, a % b
    return a


def jordan_data(mat, eigenvalue_orders):
    """Jordan block data of an invertible matrix whose eigenvalues are roots of unity
    with orders in the divisor closure of eigenvalue_orders.

    Blocks are recovered from d_k = dim ker((M - z)^k): the number of blocks of size
    >= k is d_k - d_{k-1}.  Raises EigenvalueOutsideField when the found multiplicities
    do not exhaust the dimension."""
    assert mat.rows == mat.cols
    f = mat.field
    n = mat.rows
    blocks = []
    covered = 0
    for z in candidate_roots_of_unity(f, eigenvalue_orders):
        shifted = mat - ExactMatrix.identity(f, n).scale(z)
        power = shifted
        d_prev = 0
        ge_counts = []  # ge_counts[k-1] = number of blocks of size >= k
        while True:
            d = n - rank(power)
            if d == d_prev:
                break
            ge_counts.append(d - d_prev)
            d_prev = d
            power = power * shifted
        for k, ge in enumerate(ge_counts, start=1):
            exact = ge - (ge_counts[k] if k < len(ge_counts) else 0)
            if exact:
                blocks.append((z, k, exact))
                covered += k * exact
        if covered == n:
            break
    if covered != n:
        raise EigenvalueOutsideField(
            f"found total multiplicity {covered} < {n} over orders {sorted(eigenvalue_orders)}"
        )
    return JordanData(n, blocks)


# ---------------------------------------------------------------------------
# quotient actions

def induced_quotient_action(mats, subspace):
    """Actions induced on ambient/S in the canonical complement coordinates (the
    non-pivot columns of the echelon basis).  Raises NotInvariant if some matrix does
    not map S into itself."""
    if not mats:
        return []
    f = mats[0].field
    n = subspace.ambient_dim
    free = subspace.complement_columns()
    out = []
    basis_rows = subspace.basis.raw()
    for idx, m in enumerate(mats):
        assert m.rows == m.cols == n
        for v in basis_rows:
            res = subspace.reduce(m.apply(v))
            if any(x != f.zero for x in res):
                raise NotInvariant(f"matrix {idx} does not preserve the subspace")
        cols = []
        for fc in free:
            image = m.apply(_unit_vec(f, n, fc))
            red = subspace.reduce(image)
            cols.append([red[c] for c in free])
        out.append(ExactMatrix(f, list(zip(*cols)), _raw=True))
    return out


def _unit_vec(f, n, i):
    v = [f.zero] * n
    v[i] = f.one
    return v


# ---------------------------------------------------------------------------
# simultaneous conjugacy

def simultaneous_conjugacy(tuple_a, tuple_b):
    """An invertible X with X A_i X^-1 = B_i for all i, or None.

    Solves the linear system {X : X A_i = B_i X} exactly, then searches the solution
    space for an invertible element: basis vectors first, then deterministic
    small-integer combinations (finite fields: bounded enumeration when feasible).
    Any returned witness is verified."""
    assert len(tuple_a) == len(tuple_b) and tuple_a
    f = tuple_a[0].field
    n = tuple_a[0].rows
    assert all(m.rows == m.cols == n and m.field == f for m in list(tuple_a) + list(tuple_b))
    rows = []
    for a, b in zip(tuple_a, tuple_b):
        araw, braw = a.raw(), b.raw()
        for i in range(n):
            for j in range(n):
                # coefficient of x_{cd} in (X A - B X)[i][j]
                row = [f.zero] * (n * n)
                for c in range(n):
                    row[i * n + c] = f.add(row[i * n + c], araw[c][j])
                for c in range(n):
                    row[c * n + j] = f.sub(row[c * n + j], braw[i][c])
                rows.append(row)
    sol = kernel(ExactMatrix(f, rows, _raw=True))
    if sol.dim == 0:
        return None
    basis = [
        ExactMatrix(f, [row[i * n : (i + 1) * n] for i in range(n)], _raw=True)
        for row in sol.basis.raw()
    ]

    def verified(x):
        try:
            inverse(x)
        except SingularMatrix:
            return None
        for a, b in zip(tuple_a, tuple_b):
            if x * a != b * x:
                return None
        return x

    for x in basis:
        w = verified(x)
        if w is not None:
            return w
    d = len(basis)
    if f.kind == "finite" and f.q**d <= 100_000:
        # bounded enumeration of the (low-dimensional) solution space
        elems = [FieldElement(f, c) for c in f.elements()]
        stack = [(ExactMatrix.zero(f, n, n), 0)]
        while stack:
            acc, i = stack.pop()
            if i == d:
                w = verified(acc)
                if w is not None:
                    return w
                continue
            for e in elems:
                stack.append((acc + basis[i].scale(e), i + 1))
        return None
    # deterministic small-integer combinations sum t^(j) * X_j
    for t in range(1, n * n + 2):
        acc = basis[0]
        p = 1
        for x in basis[1:]:
            p *= t
            acc = acc + x.scale(f.element(p))
        w = verified(acc)
        if w is not None:
            return w
    return None
