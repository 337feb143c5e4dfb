"""Random streams, data generators, truncated CRM sampling and the integral bound check."""

import math

import numpy as np
import pytest
from scipy import integrate as si
from scipy import special as sps

from crm_transport.measures import FixedAtom, GammaJump, GenGammaJump, Mixture1D, ScaledLevyIntensity, integrated_tail
from crm_transport.simulate import (
    ClampedLinear,
    DataSequence,
    Tanh,
    check_integral_bound,
    empirical_w1,
    gen_crp,
    gen_iid,
    gen_pitman_yor,
    sample_crm_truncated,
    sample_integrals,
    substream,
    truncated_rate,
)

BASE = Mixture1D.gaussian(0.0, 1.0)


def expected_tables(alpha, sigma, n):
    """Mean number of distinct values after ``n`` draws from the two-parameter urn."""
    if sigma == 0:
        return sum(alpha / (alpha + i) for i in range(n))
    log_ratio = sps.gammaln(alpha + sigma + n) - sps.gammaln(alpha + sigma) - sps.gammaln(alpha + n) + sps.gammaln(alpha)
    return alpha / sigma * (math.exp(log_ratio) - 1.0)


class TestStreams:
    def test_reproducible_and_independent(self):
        a = substream(5, "exp", 1).random(4)
        b = substream(5, "exp", 1).random(4)
        c = substream(5, "exp", 2).random(4)
        d = substream(6, "exp", 1).random(4)
        np.testing.assert_array_equal(a, b)
        assert not np.array_equal(a, c) and not np.array_equal(a, d)

    def test_seed_range(self):
        substream(2**64 - 1)
        with pytest.raises(ValueError):
            substream(2**64)
        with pytest.raises(ValueError):
            substream(0, -1)


class TestDataSequence:
    def test_csv_round_trip_is_exact(self, tmp_path):
        seq = gen_iid(BASE, 50, substream(0, "csv"))
        seq.to_csv(tmp_path / "d.csv")
        assert DataSequence.from_csv(tmp_path / "d.csv") == seq

    def test_summary_and_counts(self):
        seq = DataSequence([1.0, 2.0, 1.0, 3.0])
        assert seq.summary(3).distinct == ((1.0, 2), (2.0, 1))
        np.testing.assert_array_equal(seq.distinct_counts(), [1, 2, 2, 3])
        with pytest.raises(ValueError):
            seq.summary(5)


class TestUrns:
    @pytest.mark.parametrize("alpha,sigma", [(1.0, 0.0), (5.0, 0.0), (1.0, 0.5), (1.0, 0.9)])
    def test_mean_number_of_tables(self, alpha, sigma):
        n, reps = 200, 300
        ks = [len(set(gen_pitman_yor(alpha, sigma, BASE, n, substream(11, "urn", r)).values)) for r in range(reps)]
        mean, se = np.mean(ks), np.std(ks, ddof=1) / math.sqrt(reps)
        assert abs(mean - expected_tables(alpha, sigma, n)) < 4 * se

    def test_prefix_consistency(self):
        short = gen_crp(1.0, BASE, 40, substream(2, "p"))
        long = gen_crp(1.0, BASE, 120, substream(2, "p"))
        assert long.values[:40] == short.values

    def test_crp_is_sigma_zero(self):
        assert gen_crp(2.0, BASE, 30, substream(3)) == gen_pitman_yor(2.0, 0.0, BASE, 30, substream(3))

    def test_requires_atomless_base(self):
        with pytest.raises(ValueError):
            gen_pitman_yor(1.0, 0.5, Mixture1D.poisson(1.0), 10, substream(0))
        with pytest.raises(ValueError):
            gen_pitman_yor(1.0, 1.0, BASE, 10, substream(0))


class TestTruncatedCRM:
    @pytest.mark.parametrize("jump", [GammaJump(2.0), GenGammaJump(1.0, 0.5)], ids=repr)
    def test_rate_against_scipy(self, jump):
        eps = 1e-3
        ref = si.quad(lambda s: float(jump.density(s)), eps, np.inf, limit=400, epsrel=1e-11)[0]
        assert truncated_rate(ScaledLevyIntensity(jump, BASE), eps) == pytest.approx(ref, rel=1e-8)

    def test_expected_total_mass(self):
        jump = GenGammaJump(1.0, 0.5)
        eps = 1e-4
        masses = sample_integrals(ScaledLevyIntensity(jump, BASE), np.ones_like, eps, 2000, substream(9))
        single = sample_crm_truncated(ScaledLevyIntensity(jump, BASE), eps, substream(9, 1))
        assert single.total_mass() == pytest.approx(single.integral(np.ones_like), rel=1e-14)
        target = 1.0 - float(integrated_tail(jump, eps)) + eps * float(jump.tail_integral(eps))
        # E sum of jumps above eps = int_eps^inf s rho(s) ds
        se = np.std(masses, ddof=1) / math.sqrt(len(masses))
        assert abs(np.mean(masses) - target) < 4 * se

    def test_sizes_above_threshold_and_locations(self):
        i = ScaledLevyIntensity(GenGammaJump(2.0, 0.3), BASE, 0.5, (FixedAtom(7.0, GammaJump(2.0), 0.5),))
        crm = sample_crm_truncated(i, 1e-3, substream(1))
        assert np.all(crm.sizes > 1e-3)
        assert np.any(crm.locations == 7.0)

    def test_integrals_vectorized(self):
        i = ScaledLevyIntensity(GammaJump(1.0), BASE)
        draws = sample_integrals(i, np.ones_like, 1e-6, 4000, substream(4))
        # total mass of a unit-mean gamma CRM with rate 1 is Gamma(1, 1)
        assert abs(draws.mean() - 1.0) < 4 * draws.std() / math.sqrt(draws.size)
        assert abs(draws.var() - 1.0) < 0.15


class TestBoundCheck:
    def test_test_functions(self):
        f = ClampedLinear(-2.0, 1.0, 3.0)
        assert f.sup == 2.0 and f.lipschitz == 3.0
        np.testing.assert_array_equal(f(np.array([-5.0, 0.1, 5.0])), [-2.0, 0.30000000000000004, 1.0])
        assert Tanh(0.5).lipschitz == 2.0

    def test_empirical_w1(self):
        assert empirical_w1(np.array([0.0, 1.0]), np.array([3.0, 2.0])) == 2.0
        with pytest.raises(ValueError):
            empirical_w1(np.zeros(2), np.zeros(3))

    def test_bound_holds(self):
        i1 = ScaledLevyIntensity(GammaJump(1.0), BASE)
        i2 = ScaledLevyIntensity(GammaJump(2.0), BASE)
        b = check_integral_bound(i1, i2, ClampedLinear(), 1e-6, 1000, substream(0, "b"))
        assert b.holds and b.lhs < b.rhs

    def test_arguments(self):
        i1 = ScaledLevyIntensity(GammaJump(1.0), BASE)
        with pytest.raises(ValueError):
            check_integral_bound(i1, i1, ClampedLinear(), 1e-6, 1000)
        with pytest.raises(ValueError):
            check_integral_bound(i1, i1, ClampedLinear(), 1e-6, 1001, substream(0))
