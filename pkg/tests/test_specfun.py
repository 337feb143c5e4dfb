"""Special functions against mpmath and scipy oracles."""

import math

import mpmath
import numpy as np
import pytest
from scipy import integrate as si
from scipy import special as sps

from crm_transport.specfun import (
    exp1,
    gamma,
    gamma_lower_regularized,
    gamma_upper,
    gamma_upper_deriv_order,
    gamma_upper_regularized,
    lgamma1p,
)

mpmath.mp.dps = 40

ORDERS = [-1.0, -0.95, -0.75, -0.5, -0.3, -0.05, 0.0, 0.05, 0.3, 0.5, 0.75, 0.95, 1.0]
POINTS = [1e-12, 1e-6, 1e-3, 0.05, 0.5, 0.999, 1.0, 1.001, 2.0, 7.5, 30.0, 200.0]


def mp_upper(z, t):
    return float(mpmath.gammainc(z, t))


class TestGammaUpper:
    @pytest.mark.parametrize("z", ORDERS)
    def test_matches_mpmath(self, z):
        for t in POINTS:
            ref = mp_upper(z, t)
            assert gamma_upper(z, t) == pytest.approx(ref, rel=1e-12, abs=1e-300)

    @pytest.mark.parametrize("z", [-0.9, -0.25, 0.0, 0.4])
    def test_array_and_scalar_paths_agree(self, z):
        t = np.array(POINTS)
        vec = gamma_upper(z, t)
        sca = np.array([gamma_upper(z, float(x)) for x in t])
        np.testing.assert_allclose(vec, sca, rtol=1e-14)

    @pytest.mark.parametrize("z", [-0.7, -0.2, 0.3, 0.8])
    def test_recurrence(self, z):
        # Gamma(z+1, t) = z Gamma(z, t) + t^z e^{-t}
        for t in [0.01, 0.7, 3.0, 25.0]:
            lhs = gamma_upper(z + 1.0, t) if z + 1.0 <= 1.0 else float(mpmath.gammainc(z + 1.0, t))
            rhs = z * gamma_upper(z, t) + t**z * math.exp(-t)
            assert lhs == pytest.approx(rhs, rel=1e-12)

    def test_order_one_is_exponential(self):
        t = np.array([0.1, 1.0, 10.0])
        np.testing.assert_allclose(gamma_upper(1.0, t), np.exp(-t), rtol=1e-15)

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            gamma_upper(1.5, 1.0)
        with pytest.raises(ValueError):
            gamma_upper(0.5, 0.0)
        with pytest.raises(ValueError):
            gamma_upper(0.5, np.array([1.0, -1.0]))


class TestExp1:
    def test_matches_scipy(self):
        t = np.geomspace(1e-10, 300, 200)
        np.testing.assert_allclose(exp1(t), sps.exp1(t), rtol=1e-13)

    def test_classical_bounds(self):
        # 0.5 e^{-t} log(1 + 2/t) < E1(t) < e^{-t} log(1 + 1/t)
        t = np.geomspace(1e-4, 50, 60)
        e = exp1(t)
        assert np.all(e < np.exp(-t) * np.log1p(1 / t))
        assert np.all(e > 0.5 * np.exp(-t) * np.log1p(2 / t))


class TestRegularized:
    @pytest.mark.parametrize("a", [0.05, 0.5, 0.9, 1.0])
    def test_complementary(self, a):
        t = np.array([1e-8, 0.2, 0.9, 1.1, 5.0])
        total = gamma_upper_regularized(a, t) + gamma_lower_regularized(a, t)
        np.testing.assert_allclose(total, 1.0, rtol=1e-13)

    @pytest.mark.parametrize("a", [0.1, 0.5, 0.8])
    def test_lower_matches_scipy(self, a):
        t = np.array([1e-10, 1e-4, 0.3, 1.0, 4.0])
        np.testing.assert_allclose(gamma_lower_regularized(a, t), sps.gammainc(a, t), rtol=1e-12)

    def test_gamma_domain(self):
        assert gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-15)
        with pytest.raises(ValueError):
            gamma(0.0)


class TestDerivative:
    @pytest.mark.parametrize("z,t", [(-0.5, 0.3), (0.0, 1.0), (0.4, 0.01), (-0.9, 5.0)])
    def test_matches_mpmath_diff(self, z, t):
        ref = float(mpmath.diff(lambda s: mpmath.gammainc(s, t), z))
        assert gamma_upper_deriv_order(z, t) == pytest.approx(ref, rel=1e-9)

    def test_matches_scipy_quad(self):
        ref, _ = si.quad(lambda x: math.log(x) * x ** (-0.7) * math.exp(-x), 2.0, np.inf, epsabs=0, epsrel=1e-12)
        assert gamma_upper_deriv_order(0.3, 2.0) == pytest.approx(ref, rel=1e-10)


class TestLgamma1p:
    @pytest.mark.parametrize("z", [-0.29, -0.1, -1e-8, 0.0, 1e-9, 0.05, 0.29, 0.5, 0.95])
    def test_matches_mpmath(self, z):
        ref = float(mpmath.loggamma(1 + mpmath.mpf(z)))
        assert lgamma1p(z) == pytest.approx(ref, rel=5e-14, abs=1e-300)

    def test_small_argument_leading_term(self):
        z = 1e-10
        assert lgamma1p(z) == pytest.approx(-0.5772156649015329 * z, rel=1e-9)
