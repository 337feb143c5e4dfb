"""Jump families, base mixtures and scaled intensities."""

import math

import numpy as np
import pytest
from scipy import integrate as si
from scipy import special as sps
from scipy import stats

from crm_transport.measures import (
    Atom,
    Empirical,
    FixedAtom,
    GammaJump,
    Gaussian,
    GenGammaJump,
    LevyDensity,
    Mixture1D,
    PoissonLaw,
    ScaledLevyIntensity,
    integrated_tail,
    integrated_tail_beyond,
    scale_to_unit_mean,
)

JUMPS = [GammaJump(1.0), GammaJump(7.5), GenGammaJump(1.0, 0.3), GenGammaJump(0.2, 0.8), GenGammaJump(40.0, 0.05)]


class TestJumpFamilies:
    @pytest.mark.parametrize("j", JUMPS, ids=repr)
    def test_unit_first_moment_by_scipy_quad(self, j):
        m, _ = si.quad(lambda s: s * float(j.density(s)), 0, np.inf, epsrel=1e-11, limit=400)
        assert m == pytest.approx(1.0, rel=1e-8)
        assert j.first_moment() == 1.0

    @pytest.mark.parametrize("j", JUMPS, ids=repr)
    def test_tail_matches_density_quadrature(self, j):
        for u in [1e-3 / j.rate, 0.5 / j.rate, 3.0 / j.rate]:
            ref, _ = si.quad(lambda s: float(j.density(s)), u, np.inf, epsrel=1e-11, limit=400)
            assert float(j.tail_integral(u)) == pytest.approx(ref, rel=1e-8)

    @pytest.mark.parametrize("j", JUMPS, ids=repr)
    def test_integrated_tail_is_partial_integral(self, j):
        # Fubini: int_0^inf U = first moment = 1
        u = 0.7 / j.rate
        head = float(integrated_tail(j, u))
        ref, _ = si.quad(lambda v: float(j.tail_integral(v)), 0, u, epsrel=1e-11, limit=400)
        assert head == pytest.approx(ref, rel=1e-8)
        assert head + float(integrated_tail_beyond(j, u)) == pytest.approx(1.0, rel=1e-13)

    def test_gamma_tail_closed_form(self):
        u = np.array([0.01, 1.0, 5.0])
        np.testing.assert_allclose(GammaJump(3.0).tail_integral(u), 3.0 * sps.exp1(3.0 * u), rtol=1e-13)

    def test_validation(self):
        with pytest.raises(ValueError):
            GammaJump(0.0)
        with pytest.raises(ValueError):
            GenGammaJump(1.0, 1.0)
        with pytest.raises(ValueError):
            GenGammaJump(1.0, 0.0)


class TestScaling:
    @pytest.mark.parametrize("mass,rate,sigma", [(2.0, 1.0, 0.0), (5.0, 0.5, 0.0), (3.0, 2.0, 0.4), (1.0, 1.0, 0.9)])
    def test_scale_to_unit_mean(self, mass, rate, sigma):
        levy = LevyDensity(mass, rate, sigma)
        base = Mixture1D.gaussian(0.0, 1.0)
        scaled = scale_to_unit_mean(levy, base)
        assert scaled.jump.first_moment() == 1.0
        assert scaled.jump.rate == pytest.approx(rate * levy.expected_total_mass(), rel=1e-9)
        # s * rho_scaled(s) = m * s * rho(m s) pointwise
        m = levy.expected_total_mass()
        s = np.array([0.01, 0.3, 2.0])
        np.testing.assert_allclose(scaled.jump.density(s), m * levy.density(m * s), rtol=1e-8)

    def test_wrong_mean_rejected(self):
        with pytest.raises(ValueError):
            scale_to_unit_mean(LevyDensity(2.0), Mixture1D.atom(0.0), mean=3.0)


class TestMixture:
    def test_cdf_examples(self):
        m = Mixture1D([(0.25, Atom(0.0)), (0.25, Empirical([1.0, 3.0])), (0.5, Gaussian(0.0, 4.0))])
        assert m.cdf(-1e-12) == pytest.approx(0.5 * stats.norm.cdf(0.0, scale=2.0), abs=1e-9)
        assert m.cdf(0.0) == pytest.approx(0.25 + 0.25, rel=1e-14)
        assert m.cdf(2.0) == pytest.approx(0.25 + 0.125 + 0.5 * stats.norm.cdf(2.0, scale=2.0), rel=1e-14)

    def test_poisson_cdf(self):
        m = Mixture1D.poisson(2.5)
        x = np.array([-0.5, 0.0, 0.5, 3.0, 3.9, 12.0])
        np.testing.assert_allclose(m.cdf(x), stats.poisson.cdf(np.floor(x), 2.5), rtol=1e-13)

    def test_moments(self):
        m = Mixture1D([(0.5, Gaussian(1.0, 1.0)), (0.3, PoissonLaw(2.0)), (0.2, Atom(-4.0))])
        assert m.first_moment() == pytest.approx(0.5 + 0.6 - 0.8, rel=1e-14)
        ref = 0.5 * stats.foldnorm.mean(1.0) + 0.3 * 2.0 + 0.2 * 4.0
        assert m.abs_moment() == pytest.approx(ref, rel=1e-10)

    def test_weights_must_sum_to_one(self):
        with pytest.raises(ValueError):
            Mixture1D([(0.5, Atom(0.0)), (0.4, Atom(1.0))])
        with pytest.raises(ValueError):
            Mixture1D([(1.5, Atom(0.0)), (-0.5, Atom(1.0))])

    def test_combine_and_flags(self):
        m = Mixture1D.combine([(0.5, Mixture1D.gaussian(0.0, 1.0)), (0.5, Mixture1D.from_atoms([1.0, 2.0], [0.5, 0.5]))])
        assert len(m.components) == 3
        assert not m.is_atomless and m.has_continuous_part
        assert Mixture1D.gaussian(0, 1).is_atomless

    def test_sample_law(self):
        m = Mixture1D([(0.5, Gaussian(-2.0, 0.25)), (0.5, Gaussian(2.0, 0.25))])
        x = m.sample(np.random.default_rng(1), 20_000)
        assert stats.kstest(x, m.cdf).pvalue > 1e-3


class TestIntensity:
    def test_mean_measure_must_be_probability(self):
        with pytest.raises(ValueError):
            ScaledLevyIntensity(GammaJump(2.0), Mixture1D.atom(0.0), weight=0.5)

    def test_fixed_atoms(self):
        i = ScaledLevyIntensity(
            GenGammaJump(3.0, 0.5),
            Mixture1D.gaussian(0.0, 1.0),
            0.6,
            (FixedAtom(1.0, GammaJump(3.0), 0.4),),
        )
        assert not i.is_homogeneous
        assert i.base_measure().cdf(1.0) == pytest.approx(0.6 * stats.norm.cdf(1.0) + 0.4, rel=1e-14)
        assert [w for w, _, _ in i.jump_components()] == [0.6, 0.4]

    def test_unnormalized_jump_rejected(self):
        class Half(GammaJump):
            def first_moment(self):
                return 0.5

        with pytest.raises(ValueError):
            ScaledLevyIntensity(Half(1.0), Mixture1D.atom(0.0))


@pytest.mark.parametrize("mean", [0.5, 30.0])
def test_poisson_cutoff_mass(mean):
    k = PoissonLaw(mean).upper_cutoff()
    assert stats.poisson.sf(k, mean) < 1e-14
    assert math.isfinite(k)
