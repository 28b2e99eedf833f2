import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from csduality import bayeslab as bl
from csduality import distfam as d
from csduality.errors import OutOfRange


class TestSimulate:
    def test_degenerate(self):
        assert bl.simulate(bl.ExperimentConfig(50, 1.0, seed=1)) == 50
        assert bl.simulate(bl.ExperimentConfig(50, 0.0, seed=1)) == 0

    def test_seeded(self):
        cfg = bl.ExperimentConfig(100, 0.3, seed=42)
        assert bl.simulate(cfg) == bl.simulate(cfg)

    def test_concentration(self):
        # oracle: binomial(1e4, 1/2) has sd 50, so |k/N - 1/2| <= 0.015 is a 3-sigma band
        hits = sum(
            0.485 <= bl.simulate(bl.ExperimentConfig(10_000, 0.5, seed=s)) / 10_000 <= 0.515 for s in range(1000)
        )
        assert hits >= 990

    def test_distribution_matches_pmf(self):
        ks = np.array([bl.simulate(bl.ExperimentConfig(6, 0.3, seed=s)) for s in range(4000)])
        counts = np.bincount(ks, minlength=7)
        expect = 4000 * stats.binom.pmf(np.arange(7), 6, 0.3)
        keep = expect > 5
        chi2 = np.sum((counts[keep] - expect[keep]) ** 2 / expect[keep])
        assert stats.chi2.sf(chi2, keep.sum() - 1) > 1e-3

    def test_other_family(self):
        cfg = bl.ExperimentConfig(1, 2.0, seed=3, family=d.poisson_family())
        assert bl.simulate(cfg) >= 0

    def test_validation(self):
        with pytest.raises(OutOfRange):
            bl.ExperimentConfig(0, 0.5)
        with pytest.raises(OutOfRange):
            bl.ExperimentConfig(10, 1.5)


class TestPointEstimate:
    def test_examples(self):
        assert bl.point_estimate(0, 7) == 0.0
        assert bl.point_estimate(999, 1000) == 0.999
        assert bl.point_estimate(5, 10) == 0.5

    def test_validation(self):
        with pytest.raises(OutOfRange):
            bl.point_estimate(3, 2)
        with pytest.raises(OutOfRange):
            bl.point_estimate(0, 0)


class TestPosteriorSummary:
    def test_beta_8_4(self):
        s = bl.posterior_summary(d.binomial_p_family(10), None, 7)
        ref = stats.beta(8, 4)
        assert s.point_estimate == pytest.approx(2 / 3, abs=1e-4)
        assert s.mode == pytest.approx(0.7, abs=1e-4)
        lo, hi, mass = s.credible_interval
        assert (lo, hi) == pytest.approx((ref.ppf(0.025), ref.ppf(0.975)), abs=1e-4)
        assert np.max(np.abs(s.density - ref.pdf(s.grid))) <= 1e-6
        assert bl.interval_mass(s) == pytest.approx(mass, abs=1e-12)

    def test_uniform(self):
        s = bl.posterior_summary(d.binomial_p_family(0), None, 0)
        lo, hi, _ = s.credible_interval
        assert lo == pytest.approx(0.025, abs=1e-3)
        assert hi == pytest.approx(0.975, abs=1e-3)

    def test_narrow_posterior(self):
        s = bl.posterior_summary(d.binomial_p_family(1000), None, 999, mass=0.99)
        assert s.credible_interval[0] > 0.99
        assert s.credible_interval[0] == pytest.approx(stats.beta(1000, 2).ppf(0.005), abs=1e-4)

    def test_poisson_gamma(self):
        s = bl.posterior_summary(d.poisson_family(), None, 3)
        assert s.mode == pytest.approx(3.0, abs=1e-3)
        assert s.point_estimate == pytest.approx(4.0, abs=1e-3)
        assert np.max(np.abs(s.density - stats.gamma(4).pdf(s.grid))) <= 1e-6

    @settings(max_examples=10, deadline=None)
    @given(st.integers(0, 30), st.floats(0.5, 0.99))
    def test_binomial_conjugacy(self, k, mass):
        N = 30
        s = bl.posterior_summary(d.binomial_p_family(N), None, k, mass=mass)
        ref = stats.beta(k + 1, N - k + 1)
        assert np.max(np.abs(s.density - ref.pdf(s.grid))) <= 1e-6
        lo, hi, _ = s.credible_interval
        assert ref.cdf(hi) - ref.cdf(lo) == pytest.approx(mass, abs=1e-3)
        assert np.all(np.diff(s.cdf) >= 0)

    @pytest.mark.parametrize("mass", [0.0, 1.0, 1.5, -0.1])
    def test_bad_mass(self, mass):
        with pytest.raises(OutOfRange):
            bl.posterior_summary(d.poisson_family(), None, 1, mass=mass)

    def test_to_dict(self):
        out = bl.posterior_summary(d.poisson_family(), None, 2).to_dict()
        assert out["k_obs"] == 2 and out["grid"]["size"] == bl.GRID_SIZE
        assert out["interval"]["mass"] == 0.95

    def test_csv(self, tmp_path):
        s = bl.posterior_summary(d.poisson_family(), None, 3)
        p = tmp_path / "post.csv"
        bl.write_csv(s, p)
        raw = p.read_bytes()
        assert raw.startswith(b"lambda,density,cdf\r\n")
        data = np.loadtxt(p, delimiter=",", skiprows=1)
        assert data.shape == (bl.GRID_SIZE, 3)
        assert data[np.argmax(data[:, 1]), 0] == pytest.approx(3.0, abs=0.05)
        np.testing.assert_array_equal(data[:, 1], s.density)
