import math

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from horolab.arith import (
    CongruenceData,
    divisor_count,
    dist_to_z,
    kloosterman,
    kloosterman_weil_bound,
    mod_inverse,
    quad_expsum_bruteforce,
    quad_expsum_closed,
    quadsum_weil_bound,
)
from horolab.errors import DomainError, ResourceGuardError


def random_congruence(rng, N):
    while True:
        r = rng.integers(0, max(N, 2), size=4)
        if (r[0] * r[3] - r[1] * r[2]) % N == 1 % N:
            return CongruenceData(N, tuple(int(x) for x in r))


class TestDivisorCount:
    def test_small_values(self):
        assert [divisor_count(n) for n in range(1, 13)] == [
            1, 2, 2, 3, 2, 4, 2, 4, 3, 4, 2, 6,
        ]

    def test_highly_composite(self):
        assert divisor_count(360) == 24
        assert divisor_count(999983) == 2  # prime

    def test_beyond_sieve_cap(self):
        # 1048576 = 2^20 and a large semiprime, both past the table.
        assert divisor_count(2 ** 20) == 21
        assert divisor_count(1_000_003) == sympy.divisor_count(1_000_003)

    def test_rejects_nonpositive(self):
        with pytest.raises(DomainError):
            divisor_count(0)
        with pytest.raises(DomainError):
            divisor_count(-4)

    def test_against_sympy(self, rng):
        for n in rng.integers(1, 10 ** 6, size=100):
            assert divisor_count(int(n)) == sympy.divisor_count(int(n))

    @pytest.mark.parametrize("x", [100, 1000, 10000])
    def test_partial_sum_window(self, x):
        total = sum(divisor_count(n) for n in range(1, x + 1))
        assert x * math.log(x) - x <= total <= x * math.log(x) + 2 * x


class TestDistToZ:
    def test_scalar(self):
        assert dist_to_z(2.3) == pytest.approx(0.3)
        assert dist_to_z(-0.5) == pytest.approx(0.5)
        assert dist_to_z(7.0) == 0.0

    def test_vector_is_euclidean(self):
        assert dist_to_z([1.25, 3.75]) == pytest.approx(math.sqrt(2 * 0.25 ** 2))
        assert dist_to_z([0.5, 0.5, 0.5, 0.5]) == pytest.approx(1.0)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(-1e6, 1e6), st.integers(-1000, 1000))
    def test_periodicity(self, x, n):
        assert dist_to_z(x + n) == pytest.approx(dist_to_z(x), abs=1e-7)


class TestModInverse:
    def test_anchor(self):
        assert mod_inverse(7, 26) == 15

    def test_range_convention(self):
        # The trivial modulus maps everything to 1, inside [1, q].
        assert mod_inverse(5, 1) == 1
        for a in range(1, 11):
            if math.gcd(a, 11) == 1:
                inv = mod_inverse(a, 11)
                assert 1 <= inv <= 11
                assert (a * inv) % 11 == 1

    def test_rejects_non_units(self):
        with pytest.raises(DomainError):
            mod_inverse(6, 26)
        with pytest.raises(DomainError):
            mod_inverse(3, 0)


class TestKloosterman:
    def test_anchors(self):
        assert kloosterman(0, 0, 6) == pytest.approx(2.0, abs=1e-12)
        assert kloosterman(1, 1, 2) == pytest.approx(1.0, abs=1e-12)
        assert kloosterman(1, 1, 3) == pytest.approx(-1.0, abs=1e-12)
        assert kloosterman(0, 0, 1) == 1.0

    def test_unit_count(self):
        # With both arguments zero the sum just counts units.
        for q in (2, 5, 12, 30):
            assert kloosterman(0, 0, q) == pytest.approx(sympy.totient(q), abs=1e-9)

    def test_degenerate_case_is_moebius(self):
        # One argument zero gives a Ramanujan sum; at 1 that is the Moebius value.
        for q in range(1, 40):
            assert kloosterman(1, 0, q) == pytest.approx(int(sympy.mobius(q)), abs=1e-9)

    def test_symmetry(self, rng):
        for _ in range(200):
            q = int(rng.integers(1, 400))
            m = int(rng.integers(-50, 51))
            n = int(rng.integers(-50, 51))
            assert kloosterman(m, n, q) == pytest.approx(kloosterman(n, m, q), abs=1e-9)

    def test_weil_bound(self, rng):
        for q in range(1, 501):
            m = int(rng.integers(-100, 101))
            n = int(rng.integers(-100, 101))
            assert abs(kloosterman(m, n, q)) <= kloosterman_weil_bound(m, n, q) + 1e-9


class TestCongruenceData:
    def test_residue_reduction(self):
        cong = CongruenceData(2, (3, 0, 0, 3))
        assert cong.residue == (1, 0, 0, 1)

    def test_antidiagonal_unit(self):
        # Determinant -1 is 1 mod 2, so this class is admissible at level 2.
        assert CongruenceData(2, (0, 1, 1, 0)).residue == (0, 1, 1, 0)

    def test_rejects_singular_residue(self):
        with pytest.raises(DomainError):
            CongruenceData(2, (0, 0, 0, 0))
        with pytest.raises(DomainError):
            CongruenceData(3, (1, 0, 0, 2))

    def test_level_one_always_admissible(self):
        assert CongruenceData(1, (5, 7, 11, 13)).residue == (0, 0, 0, 0)


class TestQuadExpsum:
    def test_modulus_one_is_pure_phase(self, rng):
        for N in (1, 2, 3):
            cong = random_congruence(rng, N)
            v = tuple(int(x) for x in rng.integers(-4, 5, size=4))
            expected = np.exp(2j * np.pi * (np.dot(v, cong.residue) % N) / N)
            assert quad_expsum_closed(1, cong, v) == pytest.approx(expected, abs=1e-12)

    def test_level_one_anchor(self):
        cong = CongruenceData(1, (0, 0, 0, 0))
        val = quad_expsum_closed(2, cong, (0, 0, 0, 0))
        assert val == pytest.approx(-4.0 + 0j, abs=1e-12)
        brute = quad_expsum_bruteforce(2, cong, (0, 0, 0, 0))
        assert brute == pytest.approx(val, abs=1e-9)

    def test_unsolvable_twist_vanishes(self):
        cong = CongruenceData(2, (1, 0, 0, 1))
        assert quad_expsum_closed(2, cong, (1, 0, 0, 0)) == 0j
        brute = quad_expsum_bruteforce(2, cong, (1, 0, 0, 0))
        assert abs(brute) < 1e-9

    def test_closed_matches_bruteforce(self, rng):
        for q in (1, 2, 3, 4, 5):
            for N in (1, 2, 3):
                cong = random_congruence(rng, N)
                v = tuple(int(x) for x in rng.integers(-5, 6, size=4))
                b = quad_expsum_bruteforce(q, cong, v)
                c = quad_expsum_closed(q, cong, v)
                assert c == pytest.approx(b, abs=1e-6 * max(1.0, abs(b)))

    def test_brute_force_guard(self):
        cong = CongruenceData(10, (1, 0, 0, 1))
        with pytest.raises(ResourceGuardError, match="100000000"):
            quad_expsum_bruteforce(7, cong, (0, 0, 0, 0))

    def test_weil_bound_on_closed_form(self, rng):
        for _ in range(50):
            q = int(rng.integers(1, 60))
            N = int(rng.integers(1, 4))
            cong = random_congruence(rng, N)
            v = tuple(int(x) for x in rng.integers(-10, 11, size=4))
            val = quad_expsum_closed(q, cong, v)
            assert abs(val) <= quadsum_weil_bound(q, N) + 1e-6

    def test_validates_inputs(self):
        cong = CongruenceData(1, (0, 0, 0, 0))
        with pytest.raises(DomainError):
            quad_expsum_closed(0, cong, (0, 0, 0, 0))
        with pytest.raises(DomainError):
            quad_expsum_closed(2, cong, (0, 0, 0))
