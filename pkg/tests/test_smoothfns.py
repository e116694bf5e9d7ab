import math

import numpy as np
import pytest
import scipy.integrate

from horolab.smoothfns import (
    BUMP6_MASS,
    bump6,
    bump6_normalized,
    inverse_power_window,
    plateau,
)


class TestBump:
    def test_peak_and_support(self):
        assert bump6(0.0) == 1.0
        assert bump6(1.0) == 0.0
        assert bump6(-1.0) == 0.0
        assert bump6(1.7) == 0.0
        assert bump6(0.5) == pytest.approx(0.75 ** 6)

    def test_mass_constant(self):
        est, err = scipy.integrate.quad(bump6, -1, 1)
        assert est == pytest.approx(BUMP6_MASS, abs=1e-12)
        assert BUMP6_MASS == pytest.approx(2048.0 / 3003.0, rel=1e-15)

    def test_normalized_has_unit_mass(self):
        est, _ = scipy.integrate.quad(bump6_normalized, -1, 1)
        assert est == pytest.approx(1.0, abs=1e-12)

    def test_vectorized(self):
        ts = np.linspace(-2, 2, 101)
        vals = bump6(ts)
        assert vals.shape == ts.shape
        assert np.all(vals >= 0)
        assert np.all(vals[np.abs(ts) >= 1] == 0)

    def test_flat_to_fifth_order_at_edge(self):
        # All derivatives through order five vanish at the support edge, so
        # values just inside grow like the sixth power of the distance.
        for eps in (1e-1, 1e-2, 1e-3):
            inside = bump6(1.0 - eps)
            assert inside == pytest.approx((eps * (2 - eps)) ** 6, rel=1e-12)
            assert inside <= (2 * eps) ** 6


class TestPlateau:
    def test_flat_top_is_exact(self):
        for t in (0.0, 0.25, 0.5, 0.99, 1.0):
            assert plateau(t) == 1.0

    def test_support(self):
        for t in (-2.0, -2.5, 2.0, 3.0):
            assert plateau(t) == 0.0
        assert 0.0 < plateau(-1.0) < 1.0
        assert 0.0 < plateau(1.5) < 1.0

    def test_midpoint_symmetry_values(self):
        assert plateau(-1.0) == pytest.approx(0.5, abs=1e-12)
        assert plateau(1.5) == pytest.approx(0.5, abs=1e-12)

    def test_monotone_shoulders(self):
        rise = plateau(np.linspace(-2, 0, 40))
        fall = plateau(np.linspace(1, 2, 40))
        assert np.all(np.diff(rise) >= 0)
        assert np.all(np.diff(fall) <= 0)

    def test_rise_derivative_matches_bump(self):
        # On the rising shoulder the derivative is the unit-mass bump.
        h = 1e-6
        for t in (-1.7, -1.2, -0.6, -0.2):
            fd = (plateau(t + h) - plateau(t - h)) / (2 * h)
            assert fd == pytest.approx(bump6_normalized(t + 1.0), rel=1e-5)


class TestInversePowerWindow:
    def test_even_and_decaying(self):
        xs = np.linspace(0.0, 30.0, 50)
        vals = inverse_power_window(xs)
        assert np.all(np.diff(vals) < 0)
        assert inverse_power_window(-3.0) == inverse_power_window(3.0)

    def test_beats_cubic_decay(self):
        for x in (1.0, 2.0, 10.0, 100.0):
            assert inverse_power_window(x) <= (1.0 + x) ** -3.0

    def test_integrable_mass(self):
        est, _ = scipy.integrate.quad(inverse_power_window, -np.inf, np.inf)
        assert est > 0
        tail, _ = scipy.integrate.quad(inverse_power_window, 50, np.inf)
        assert tail < 1e-30
