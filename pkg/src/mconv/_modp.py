"""Dense linear algebra mod an odd prime, vectorized with numpy int64.

Exactness: all values stay reduced in [0, ell); dot products are bounded by
cols * (ell-1)^2, asserted to fit in int64.  Used as a fast path for prime-field
matrices; results are identical to the generic exact routines (RREF is canonical).
"""

from __future__ import annotations

import numpy as np


def _check(ell, cols):
    assert cols * (ell - 1) ** 2 < 2**62, "int64 overflow risk"


def inv_mod(a, ell):
    return pow(int(a), ell - 2, ell)


def matmul_mod(a, b, ell):
    """Exact (a @ b) % ell.  Entries are reduced, so every dot product stays well
    below 2^53; the multiply runs in float64 to get BLAS speed."""
    k = a.shape[-1]
    assert k * (ell - 1) ** 2 < 2**52, "float64 exactness bound"
    prod = a.astype(np.float64) @ b.astype(np.float64)
    return np.rint(prod).astype(np.int64) % ell


def rref_mod(mat, ell):
    """(rref ndarray, pivot column list); partial pivoting on the first nonzero entry.
    Updates only the rows that actually carry a nonzero coefficient, in place."""
    r = np.array(mat, dtype=np.int64) % ell
    m, n = r.shape
    _check(ell, max(n, 1))
    pivots = []
    row = 0
    for col in range(n):
        if row == m:
            break
        nz = np.nonzero(r[row:, col])[0]
        if nz.size == 0:
            continue
        pr = row + int(nz[0])
        if pr != row:
            r[[row, pr]] = r[[pr, row]]
        r[row] = r[row] * inv_mod(r[row, col], ell) % ell
        c = r[:, col]
        touched = np.nonzero(c)[0]
        touched = touched[touched != row]
        if touched.size:
            block = r[touched]
            block -= np.outer(c[touched], r[row])
            block %= ell
            r[touched] = block
        pivots.append(col)
        row += 1
    return r[:row], pivots


def kernel_mod(mat, ell):
    """Basis of the right kernel as rows of an ndarray, in canonical RREF."""
    r, pivots = rref_mod(mat, ell)
    n = np.shape(mat)[1]
    free = [c for c in range(n) if c not in set(pivots)]
    basis = np.zeros((len(free), n), dtype=np.int64)
    for i, fc in enumerate(free):
        basis[i, fc] = 1
        for j, pc in enumerate(pivots):
            basis[i, pc] = (-int(r[j, fc])) % ell
    if len(free):
        basis, _ = rref_mod(basis, ell)
    return basis


class SpinBasis:
    """Incremental RREF basis of vectors in F_ell^n (for algebra spans).
    Storage is preallocated up to n rows (our spans live inside F_ell^n)."""

    def __init__(self, n, ell):
        self.ell = ell
        self.n = n
        self._store = np.zeros((n, n), dtype=np.int64)
        self.pivots = []
        _check(ell, n)

    @property
    def dim(self):
        return len(self.pivots)

    @property
    def rows(self):
        return self._store[: self.dim]

    def reduce(self, v):
        v = v % self.ell
        if self.pivots:
            coeffs = v[self.pivots]
            if np.any(coeffs):
                v = (v - matmul_mod(coeffs, self.rows, self.ell)) % self.ell
        return v

    def insert(self, v):
        """Reduce v against the basis; if independent, add it and return True."""
        v = self.reduce(v)
        nz = np.nonzero(v)[0]
        if nz.size == 0:
            return False
        lead = int(nz[0])
        v = v * inv_mod(v[lead], self.ell) % self.ell
        d = self.dim
        if d:
            col = self._store[:d, lead].copy()
            if np.any(col):
                self._store[:d] = (self._store[:d] - np.outer(col, v)) % self.ell
        self._store[d] = v
        self.pivots.append(lead)
        return True
