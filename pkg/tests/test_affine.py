import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from horolab.affine import (
    GAP_CAP,
    GroupElement,
    PlanarGrid,
    RectangleRT,
    grid_gap,
    grid_of,
    log_gauge,
)
from horolab.errors import DomainError
from horolab.sl2core import Sl2Matrix, cuspidal_height

from conftest import random_sl2


def random_element(rng, k=1, scale=1.0):
    return GroupElement(random_sl2(rng, scale), rng.random((k, 2)) * 2 - 1)


def scan_gap(basis, offset, T, exclude_origin, radius=64):
    """Reference minimum over a big explicit window of lattice coefficients.

    Mirrors the production evaluation formula exactly so that agreement can
    be asserted without any tolerance.
    """
    ms = np.arange(-radius, radius + 1)
    m_grid, n_grid = np.meshgrid(ms, ms, indexing="ij")
    x1 = m_grid * basis[0, 0] + n_grid * basis[1, 0] + offset[0]
    x2 = m_grid * basis[0, 1] + n_grid * basis[1, 1] + offset[1]
    vals = np.maximum(T * np.abs(x1), np.abs(x2))
    if exclude_origin:
        vals[radius, radius] = np.inf
    return float(vals.min())


class TestGroupElement:
    def test_block_shape_validation(self):
        with pytest.raises(DomainError):
            GroupElement(Sl2Matrix.identity(), np.zeros(2))
        with pytest.raises(DomainError):
            GroupElement(Sl2Matrix.identity(), np.zeros((1, 3)))

    def test_identity_and_inverse(self, rng):
        for k in (1, 2, 3):
            for _ in range(20):
                g = random_element(rng, k=k)
                p = g * g.inverse()
                assert np.allclose(p.matrix.as_array(), np.eye(2), atol=1e-10)
                assert np.allclose(p.translation, 0.0, atol=1e-10)

    def test_mismatched_k_rejected(self, rng):
        with pytest.raises(DomainError):
            random_element(rng, k=1) * random_element(rng, k=2)

    def test_associativity(self, rng):
        for _ in range(50):
            g1, g2, g3 = (random_element(rng, k=2) for _ in range(3))
            left = (g1 * g2) * g3
            right = g1 * (g2 * g3)
            assert np.allclose(left.matrix.as_array(), right.matrix.as_array(), atol=1e-10)
            assert np.allclose(left.translation, right.translation, atol=1e-10)

    def test_torus_point_roundtrip(self, rng):
        xi = rng.random((3, 2))
        m = random_sl2(rng)
        g = GroupElement.from_torus_point(m, xi)
        assert np.allclose(g.torus_point(), xi, atol=1e-12)

    def test_projection_is_homomorphism(self, rng):
        q = [2, -1, 3]
        for _ in range(30):
            g, h = random_element(rng, k=3), random_element(rng, k=3)
            lhs = (g * h).project(q)
            rhs = g.project(q) * h.project(q)
            assert np.allclose(lhs.matrix.as_array(), rhs.matrix.as_array(), atol=1e-12)
            assert np.allclose(lhs.translation, rhs.translation, atol=1e-10)

    def test_projection_validates_input(self, rng):
        g = random_element(rng, k=2)
        with pytest.raises(DomainError):
            g.project([1])
        with pytest.raises(DomainError):
            g.project([0.5, 1.0])


class TestPlanarGrid:
    def test_membership(self):
        grid = PlanarGrid(np.array([[2.0, 0.0], [0.0, 3.0]]), np.array([0.5, 0.5]))
        assert grid.contains([2.5, 3.5])
        assert grid.contains([0.5, 0.5])
        assert not grid.contains([1.5, 0.5])
        assert grid.contains([2.5 + 1e-10, 3.5])
        assert not grid.contains([2.5 + 1e-6, 3.5])

    def test_degenerate_basis_rejected(self):
        with pytest.raises(DomainError):
            PlanarGrid(np.array([[1.0, 2.0], [2.0, 4.0]]), np.zeros(2))

    def test_grid_of_projected_element(self, rng):
        g = random_element(rng, k=2)
        q = [1, -2]
        grid = grid_of(g, q)
        proj = g.project(q)
        assert np.allclose(grid.basis, proj.matrix.as_array())
        assert np.allclose(grid.offset, proj.translation[0])
        # Every grid point n B + offset must test as a member.
        for n in ([0, 0], [3, -2], [-5, 1]):
            point = np.asarray(n, dtype=float) @ grid.basis + grid.offset
            assert grid.contains(point)


class TestRectangle:
    def test_validation(self):
        with pytest.raises(DomainError):
            RectangleRT(0.5)
        with pytest.raises(DomainError):
            RectangleRT(math.inf)

    def test_entry_scale(self):
        rect = RectangleRT(4.0)
        assert rect.entry_scale([0.25, 0.5]) == 1.0
        assert rect.entry_scale([0.0, -3.0]) == 3.0
        assert rect.entry_scale([1.0, 0.0]) == 4.0


class TestGridGap:
    def test_identity_element(self):
        g = GroupElement.identity()
        for T in (1.0, 2.0, 10.0, 1e4):
            assert grid_gap(g, [0], T).value == 1.0

    def test_origin_in_grid_gives_zero(self, rng):
        m = random_sl2(rng)
        g = GroupElement.from_torus_point(m, np.array([[0.5, 0.5]]))
        assert grid_gap(g, [2], 7.0).value == 0.0
        assert grid_gap(g, [1], 7.0).value > 0.0

    def test_witness_lies_on_grid(self, rng):
        for _ in range(50):
            g = random_element(rng, k=2)
            q = [int(rng.integers(-3, 4)), int(rng.integers(-3, 4))]
            T = float(np.exp(rng.random() * math.log(100)))
            res = grid_gap(g, q, T)
            if res.value == 0.0:
                continue
            assert grid_of(g, q).contains(res.witness)
            assert RectangleRT(T).entry_scale(res.witness) == res.value

    def test_matches_big_scan(self, rng):
        for _ in range(200):
            g = random_element(rng, k=1)
            zero_q = rng.random() < 0.4
            q = [0] if zero_q else [int(rng.integers(1, 4)) * (1 if rng.random() < 0.5 else -1)]
            T = float(np.exp(rng.random() * math.log(64)))
            grid = grid_of(g, q)
            expected = scan_gap(grid.basis, grid.offset, T, exclude_origin=zero_q)
            got = grid_gap(g, q, T).value
            assert got == expected

    def test_tracks_cuspidal_height(self, rng):
        # The squared reciprocal of the gap stays within an absolute factor
        # of the renormalized cusp height along the diagonal flow.
        for _ in range(20):
            g = GroupElement(random_sl2(rng), np.zeros((1, 2)))
            for T in (2.0, 10.0, 100.0, 1000.0):
                s = grid_gap(g, [0], T).value
                y = cuspidal_height(g.matrix @ Sl2Matrix.dilation(T)) / T
                ratio = (s ** -2) / y
                assert 1 / 16 <= ratio <= 16, (T, ratio)


class TestLogGauge:
    def test_anchor_values(self):
        assert log_gauge(1.0, 1) == pytest.approx(math.log(3.0), rel=1e-15)
        assert log_gauge(0.5, 0) == 0.5
        assert log_gauge(2.0, 2) == pytest.approx(2.0 * math.log(2.5) ** 2, rel=1e-15)

    def test_domain(self):
        with pytest.raises(DomainError):
            log_gauge(0.0, 1)
        with pytest.raises(DomainError):
            log_gauge(-1.0, 1)
        with pytest.raises(DomainError):
            log_gauge(1.0, -2)

    @settings(max_examples=100, deadline=None)
    @given(x=st.floats(1e-8, 1e3), j=st.integers(0, 4))
    def test_positive(self, x, j):
        assert log_gauge(x, j) > 0.0

    def test_first_order_gauge_is_monotone(self):
        # Higher orders dip slightly near x ~ 0.1, so only j = 1 is tested.
        xs = np.logspace(-6, 2, 50)
        vals = [log_gauge(float(x), 1) for x in xs]
        assert all(b > a for a, b in zip(vals, vals[1:]))

    def test_higher_order_gauge_vanishes_at_zero(self):
        assert log_gauge(1e-12, 3) < 1e-6
        assert log_gauge(100.0, 3) > log_gauge(1.0, 3)
