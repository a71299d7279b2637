"""Shared fixtures.  The heavy pipeline objects are session-scoped: each (family, m, r, q)
configuration is computed exactly once per test run."""

from __future__ import annotations

import random

import pytest

from mconv.convolution import build_ambient, mc
from mconv.fields import make_cyclotomic_field, root_of_unity
from mconv.groups import burnside_dimension
from mconv.linalg import ExactMatrix, inverse
from mconv.pipeline import PipelineConfig, build_family, run_pipeline
from mconv.tuples import MonodromyTuple, construct_T, validate


@pytest.fixture(scope="session")
def t49():
    return construct_T(4, 9)


@pytest.fixture(scope="session")
def t610():
    return construct_T(6, 10)


@pytest.fixture(scope="session")
def families_49():
    return {fam: build_family(fam, 4, 9) for fam in (1, 2, 3, 4)}


@pytest.fixture(scope="session")
def report_f1_q5():
    return run_pipeline(PipelineConfig(family=1, m=4, r=9, q=5))


@pytest.fixture(scope="session")
def report_f2_q5():
    return run_pipeline(PipelineConfig(family=2, m=4, r=9, q=5))


@pytest.fixture(scope="session")
def report_f3_q5():
    return run_pipeline(PipelineConfig(family=3, m=4, r=9, q=5))


@pytest.fixture(scope="session")
def report_f4_q5():
    return run_pipeline(PipelineConfig(family=4, m=4, r=9, q=5))


# ---------------------------------------------------------------------------
# random certified-irreducible tuples with root-of-unity eigenvalues

def random_unimodular(rng, field, n, steps=6):
    """Product of elementary integer row operations: invertible, integer entries."""
    m = ExactMatrix.identity(field, n)
    for _ in range(steps):
        i = rng.randrange(n)
        j = rng.randrange(n)
        if i == j:
            continue
        c = field.element(rng.choice([-2, -1, 1, 2]))
        rows = [list(r) for r in m.raw()]
        rows[i] = [field.add(a, field.mul(c.coeffs, b)) for a, b in zip(rows[i], rows[j])]
        m = ExactMatrix(field, rows, _raw=True)
    return m


def random_irreducible_tuple(rng, field, n, r):
    """A random tuple with diagonalizable root-of-unity finite entries, certified
    absolutely irreducible by the Burnside test; None if the draw fails."""
    orders = [1, 2, 3, 4, 6, 12]
    finite = []
    for _ in range(r):
        while True:
            evs = [root_of_unity(field, rng.choice(orders), rng.randrange(12)) for _ in range(n)]
            if any(not e.is_one() for e in evs):
                break
        d = ExactMatrix.diagonal(field, evs)
        s = random_unimodular(rng, field, n)
        finite.append(s * d * inverse(s))
    prod = ExactMatrix.identity(field, n)
    for m in finite:
        prod = prod * m
    t = MonodromyTuple(field, finite + [inverse(prod)])
    validate(t)
    if burnside_dimension(t.entries) != n * n:
        return None
    return t


@pytest.fixture(scope="session")
def random_tuples_50():
    """50 deterministic certified-irreducible tuples, n <= 3, r <= 5."""
    rng = random.Random(20240811)
    field = make_cyclotomic_field(12)
    out = []
    while len(out) < 50:
        n = rng.choice([1, 2, 2, 3])
        r = rng.choice([3, 4, 5])
        t = random_irreducible_tuple(rng, field, n, r)
        if t is not None:
            out.append(t)
    return out


@pytest.fixture(scope="session")
def mc14_49(t49):
    """First convolution of T_{4,9} (rank 14), shared by several tests."""
    return mc(t49, -1)


@pytest.fixture(scope="session")
def workspace_49(t49):
    return build_ambient(t49, -1)
