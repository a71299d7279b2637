import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mconv.errors import (
    InvalidCharacteristic,
    NotIntegralAtPrime,
    OrderUnavailable,
    RamifiedPrime,
    ResidueFieldTooSmall,
)
from mconv.fields import (
    apply_residue,
    cyclotomic_polynomial,
    cyclotomic_to_subfield,
    divisors,
    embed_finite,
    euler_phi,
    make_cyclotomic_field,
    make_finite_field,
    make_residue_map,
    multiplicative_order,
    rational_field,
    root_of_unity,
)


def brute_cyclotomic(n):
    """Independent oracle: divide x^n - 1 by the product of Phi_d (d | n proper),
    with plain Fraction polynomial division."""
    if n == 1:
        return [-1, 1]
    num = [Fraction(0)] * (n + 1)
    num[0], num[n] = Fraction(-1), Fraction(1)
    den = [Fraction(1)]
    for d in divisors(n)[:-1]:
        phi_d = [Fraction(c) for c in brute_cyclotomic(d)]
        new = [Fraction(0)] * (len(den) + len(phi_d) - 1)
        for i, a in enumerate(den):
            for j, b in enumerate(phi_d):
                new[i + j] += a * b
        den = new
    # long division num / den
    q = [Fraction(0)] * (len(num) - len(den) + 1)
    rem = num[:]
    for i in range(len(q) - 1, -1, -1):
        c = rem[i + len(den) - 1] / den[-1]
        q[i] = c
        for j, b in enumerate(den):
            rem[i + j] -= c * b
    assert all(c == 0 for c in rem)
    return [int(c) for c in q]


class TestCyclotomicConstruction:
    def test_order_4_modulus_is_forced(self):
        f = make_cyclotomic_field(4)
        assert f.modulus == (1, 0, 1)  # x^2 + 1
        assert f.degree == 2

    def test_order_1_is_degree_one(self):
        f = make_cyclotomic_field(1)
        assert f.degree == 1
        x = f.element(3)
        assert (x * x).serialize() == ["9"]

    def test_order_12_modulus_derived(self):
        f = make_cyclotomic_field(12)
        assert f.degree == euler_phi(12) == 4
        assert list(f.modulus) == brute_cyclotomic(12) == [1, 0, -1, 0, 1]

    @pytest.mark.parametrize("n", [2, 3, 5, 6, 8, 9, 10, 12, 24])
    def test_modulus_matches_brute_force(self, n):
        assert list(cyclotomic_polynomial(n)) == brute_cyclotomic(n)


class TestFiniteConstruction:
    def test_prime_field_modulus_collapses(self):
        f = make_finite_field(5, 1)
        assert f.modulus == (0,)
        assert f.q == 5

    def test_f25_smallest_irreducible(self):
        f = make_finite_field(5, 2)
        assert f.modulus == (2, 0)  # x^2 + 2: -2 = 3 is a non-square mod 5

    def test_f9(self):
        f = make_finite_field(3, 1)
        assert f.q == 3

    def test_even_characteristic_rejected(self):
        with pytest.raises(InvalidCharacteristic):
            make_finite_field(2, 1)

    def test_composite_characteristic_rejected(self):
        with pytest.raises(InvalidCharacteristic):
            make_finite_field(9, 1)


class TestRootsOfUnity:
    def test_zeta4(self):
        f = make_cyclotomic_field(4)
        assert root_of_unity(f, 4, 1).coeffs == (0, 1)

    def test_zeta4_squared_is_minus_one(self):
        f = make_cyclotomic_field(4)
        assert root_of_unity(f, 2, 1) == f.element(-1)

    def test_f5_order_four_element(self):
        f = make_finite_field(5, 1)
        z = root_of_unity(f, 4, 1)
        assert z == f.element(2)
        # independent: 2 is the smallest element of order 4 (orbit 2, 4, 3, 1)
        orbit = [pow(2, k, 5) for k in range(1, 5)]
        assert orbit == [2, 4, 3, 1]

    def test_unavailable_order(self):
        with pytest.raises(OrderUnavailable):
            root_of_unity(make_cyclotomic_field(4), 3, 1)
        with pytest.raises(OrderUnavailable):
            root_of_unity(make_finite_field(5, 1), 3, 1)

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 6, 8, 12])
    def test_exact_order(self, n):
        f = make_cyclotomic_field(n)
        z = root_of_unity(f, n, 1)
        assert (z**n).is_one()
        for d in divisors(n)[:-1]:
            assert not (z**d).is_one()

    @pytest.mark.parametrize("n", [4, 6, 8, 12])
    def test_compatibility_zeta_d_from_zeta_n(self, n):
        f = make_cyclotomic_field(n)
        for d in divisors(n):
            assert root_of_unity(f, d, 1) == root_of_unity(f, n, n // d)

    def test_finite_field_compatibility(self):
        f = make_finite_field(13, 1)
        for d in divisors(12):
            assert root_of_unity(f, d, 1) == root_of_unity(f, 12, 12 // d)


class TestFieldAxioms:
    def _random_element(self, rng, f):
        if f.kind == "finite":
            return f.element([rng.randrange(f.ell) for _ in range(f.k)])
        num = lambda: rng.randint(-9, 9)
        den = lambda: rng.randint(1, 9)
        from mconv.fields import mpq

        return f.element([mpq(num(), den()) for _ in range(f.degree)])

    @pytest.mark.parametrize(
        "field",
        [rational_field(), make_cyclotomic_field(12), make_finite_field(5, 1), make_finite_field(5, 2)],
        ids=["Q", "Q(zeta12)", "F5", "F25"],
    )
    def test_axioms_on_random_triples(self, field):
        rng = random.Random(99)
        one = field.element(1)
        for _ in range(1000):
            a, b, c = (self._random_element(rng, field) for _ in range(3))
            assert (a + b) + c == a + (b + c)
            assert (a * b) * c == a * (b * c)
            assert a * (b + c) == a * b + a * c
            if not a.is_zero():
                assert a * a.inverse() == one


class TestResidueMaps:
    def test_zeta4_to_f5(self):
        f = make_cyclotomic_field(4)
        rmap = make_residue_map(f, 5, 1)
        img = rmap.image_of_root
        assert img == rmap.target.element(2)
        # Phi_4(2) = 5 = 0 mod 5
        assert (img * img + 1).is_zero()
        assert apply_residue(rmap, root_of_unity(f, 4, 1)) == rmap.target.element(2)

    def test_rational_reduction(self):
        f = make_cyclotomic_field(1)
        rmap = make_residue_map(f, 5, 1)
        third = f.element(1) / f.element(3)
        assert apply_residue(rmap, third) == rmap.target.element(2)  # 3 * 2 = 6 = 1

    def test_ramified_prime(self):
        with pytest.raises(RamifiedPrime):
            make_residue_map(make_cyclotomic_field(4), 2, 1)

    def test_residue_field_too_small(self):
        with pytest.raises(ResidueFieldTooSmall):
            make_residue_map(make_cyclotomic_field(12), 7, 1)  # ord(7 mod 12) = 2

    def test_non_integral_denominator(self):
        f = make_cyclotomic_field(1)
        rmap = make_residue_map(f, 5, 1)
        with pytest.raises(NotIntegralAtPrime):
            apply_residue(rmap, f.element(1) / f.element(5))

    def test_ring_homomorphism_on_random_pairs(self):
        rng = random.Random(7)
        f = make_cyclotomic_field(4)
        rmap = make_residue_map(f, 5, 1)
        from mconv.fields import mpq

        def rand_integral():
            # denominators coprime to 5
            return f.element([mpq(rng.randint(-20, 20), rng.choice([1, 2, 3, 4, 6, 7])) for _ in range(2)])

        for _ in range(1000):
            a, b = rand_integral(), rand_integral()
            assert apply_residue(rmap, a + b) == apply_residue(rmap, a) + apply_residue(rmap, b)
            assert apply_residue(rmap, a * b) == apply_residue(rmap, a) * apply_residue(rmap, b)

    def test_image_of_root_has_exact_order(self):
        rmap = make_residue_map(make_cyclotomic_field(4), 5, 1)
        assert multiplicative_order(rmap.image_of_root) == 4
        rmap = make_residue_map(make_cyclotomic_field(12), 13, 1)
        assert multiplicative_order(rmap.image_of_root) == 12

    def test_minimal_degree_extension(self):
        rmap = make_residue_map(make_cyclotomic_field(12), 7, 2)
        assert rmap.target.q == 49
        assert multiplicative_order(rmap.image_of_root) == 12


class TestEmbeddingsAndRestriction:
    def test_embed_prime_into_quadratic(self):
        f5 = make_finite_field(5, 1)
        f25 = make_finite_field(5, 2)
        x = f5.element(3)
        y = embed_finite(x, f25)
        assert y.field == f25
        assert y * y == embed_finite(x * x, f25)

    def test_subfield_restriction_roundtrip(self):
        big = make_cyclotomic_field(12)
        small = make_cyclotomic_field(6)
        z6 = root_of_unity(big, 6, 1)
        r = cyclotomic_to_subfield(z6, small)
        assert r == root_of_unity(small, 6, 1)

    def test_restriction_rejects_outside_subfield(self):
        big = make_cyclotomic_field(12)
        small = make_cyclotomic_field(6)
        with pytest.raises(ValueError):
            cyclotomic_to_subfield(root_of_unity(big, 4, 1), small)


class TestSerialization:
    @given(st.integers(-50, 50), st.integers(1, 30))
    @settings(max_examples=60, deadline=None)
    def test_rational_roundtrip(self, num, den):
        f = rational_field()
        from mconv.fields import mpq

        x = f.element([mpq(num, den)])
        assert f.element(f.parse_raw(x.serialize())) == x

    def test_cyclotomic_shape(self):
        f = make_cyclotomic_field(12)
        x = root_of_unity(f, 12, 5)
        s = x.serialize()
        assert isinstance(s, list) and len(s) == 4 and all(isinstance(v, str) for v in s)

    def test_finite_shape(self):
        f = make_finite_field(5, 2)
        s = f.element([3, 4]).serialize()
        assert s == [3, 4]

    def test_descriptors(self):
        assert make_cyclotomic_field(4).descriptor() == {"kind": "cyclotomic", "order": 4}
        assert make_finite_field(5, 2).descriptor() == {
            "kind": "finite",
            "l": 5,
            "k": 2,
            "modulus": [2, 0],
        }
        assert rational_field().descriptor() == {"kind": "rational"}
