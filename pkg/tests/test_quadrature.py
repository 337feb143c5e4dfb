"""Adaptive Gauss-Kronrod integration and bracketing root finders."""

import math

import numpy as np
import pytest

from crm_transport.quadrature import (
    QuadratureError,
    bisect,
    bisect_vec,
    geometric_grid,
    gk15,
    integrate,
    scan_sign_changes,
)


class TestGK15:
    def test_exact_for_polynomials(self):
        # Kronrod is exact to degree 22, the embedded Gauss rule to degree 13
        k, err = gk15(lambda x: x**22, np.array([0.0]), np.array([1.0]))
        assert k[0] == pytest.approx(1 / 23, rel=1e-14)
        k, err = gk15(lambda x: x**13, np.array([0.0]), np.array([1.0]))
        assert err[0] < 1e-15

    def test_panels_are_independent(self):
        k, _ = gk15(np.sin, np.array([0.0, 1.0]), np.array([1.0, 2.0]))
        np.testing.assert_allclose(k, [1 - math.cos(1), math.cos(1) - math.cos(2)], rtol=1e-14)


class TestIntegrate:
    def test_smooth(self):
        assert integrate(np.exp, [0.0, 1.0]) == pytest.approx(math.e - 1, rel=1e-13)

    def test_log_singularity(self):
        val = integrate(lambda x: -np.log(x), [0.0, 1e-12, 1e-6, 1e-3, 1.0], rtol=1e-12)
        assert val == pytest.approx(1.0, rel=1e-10)

    def test_kink_at_breakpoint(self):
        assert integrate(np.abs, [-1.0, 0.0, 2.0]) == pytest.approx(2.5, rel=1e-14)

    def test_long_range_exponential(self):
        pts = np.concatenate([[0.0], geometric_grid(1e-3, 800.0)])
        assert integrate(lambda x: np.exp(-x), pts, rtol=1e-13) == pytest.approx(1.0, rel=1e-12)

    def test_budget_exhaustion_raises(self):
        with pytest.raises(QuadratureError):
            integrate(lambda x: np.sin(1 / np.maximum(x, 1e-300)), [0.0, 1.0], max_panels=50, rtol=1e-14)


class TestGeometricGrid:
    def test_covers_endpoints(self):
        g = geometric_grid(1e-3, 10.0)
        assert g[0] == pytest.approx(1e-3) and g[-1] == pytest.approx(10.0)
        assert np.all(np.diff(np.log(g)) <= math.log(2.0) + 1e-12)

    def test_invalid(self):
        with pytest.raises(ValueError):
            geometric_grid(0.0, 1.0)


class TestBisect:
    def test_root(self):
        r = bisect(lambda x: x * x - 2.0, 0.0, 2.0)
        assert r == pytest.approx(math.sqrt(2), rel=1e-15)

    def test_endpoint_root(self):
        assert bisect(lambda x: x - 1.0, 1.0, 3.0) == 1.0

    def test_requires_bracket(self):
        with pytest.raises(ValueError):
            bisect(lambda x: x * x + 1.0, -1.0, 1.0)

    def test_vectorized_matches_scalar(self):
        targets = np.array([0.1, 0.5, 2.0, 9.0])
        roots = bisect_vec(lambda x: x**3 - targets, np.zeros(4), np.full(4, 3.0))
        np.testing.assert_allclose(roots, np.cbrt(targets), rtol=1e-14)

    def test_vectorized_log_space(self):
        targets = np.array([1e-6, 1.0, 1e6])
        roots = bisect_vec(lambda x: np.log(x) - np.log(targets), np.full(3, 1e-9), np.full(3, 1e9), iters=80, log_space=True)
        np.testing.assert_allclose(roots, targets, rtol=1e-13)


class TestScan:
    def test_finds_all_changes(self):
        grid = np.linspace(0.1, 10.0, 400)
        br = scan_sign_changes(np.sin, grid)
        assert len(br) == 3
        for (lo, hi), k in zip(br, (1, 2, 3)):
            assert lo < k * math.pi < hi

    def test_floor_ignores_small_values(self):
        grid = np.linspace(-1, 1, 21)
        assert scan_sign_changes(lambda x: 1e-20 * x, grid, floor=1e-15) == []
