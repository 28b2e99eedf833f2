import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate
from scipy.special import beta as beta_fn

from csduality import distfam as d
from csduality import roi, seqcore
from csduality.errors import DivergentIntegral, IndexOutOfRange


class TestMeasures:
    def test_poisson_density_matches_reduced(self):
        mu = roi.poisson_measure()
        x = np.linspace(0, 5, 11)
        np.testing.assert_allclose(mu.density(x), np.exp(-x) / (2 * math.pi), rtol=1e-15)

    @pytest.mark.parametrize("N", [0, 3, 8])
    def test_su2_total_mass(self, N):
        val, _ = integrate.quad(roi.su2_measure(N).density, 0, np.inf)
        assert 2 * math.pi * val == pytest.approx(1.0, rel=1e-10)

    def test_su11_moments_closed_form(self):
        # oracle: (m+1) int_0^1 w^k (1-w)^m dw = (m+1) B(k+1, m+1)
        m = 2
        mu = roi.su11_measure(m)
        for k in range(6):
            assert 2 * math.pi * mu.moment(k) == pytest.approx((m + 1) * beta_fn(k + 1, m + 1), rel=1e-10)

    def test_measure_for(self):
        assert roi.measure_for(seqcore.poisson_sequence()).name == "poisson"
        assert roi.measure_for(seqcore.su2_sequence(4)).name == "su2(N=4)"
        with pytest.raises(KeyError):
            roi.measure_for(seqcore.constant_sequence(2.0, 10))

    def test_half_integer_moment(self):
        # int lambda^{1/2} e^{-lambda} = Gamma(3/2)
        assert 2 * math.pi * roi.poisson_measure().moment(0.5) == pytest.approx(math.gamma(1.5), rel=1e-9)


class TestMomentCondition:
    def test_poisson_k3(self):
        rep = roi.moment_check(seqcore.poisson_sequence(), roi.poisson_measure(), 3)
        assert rep.lhs[3] == pytest.approx(6 / (2 * math.pi), rel=1e-15)
        assert rep.max_residual <= 1e-10

    def test_k0_normalization(self):
        rep = roi.moment_check(seqcore.poisson_sequence(), roi.poisson_measure(), 0)
        assert 2 * math.pi * rep.rhs[0] == pytest.approx(1.0, abs=1e-14)

    def test_poisson_to_20(self):
        rep = roi.moment_check(seqcore.poisson_sequence(), roi.poisson_measure(), 20)
        assert rep.max_residual <= 1e-12

    @pytest.mark.parametrize("N", [1, 4, 8])
    def test_su2(self, N):
        assert roi.moment_check(seqcore.su2_sequence(N), roi.su2_measure(N), N).max_residual <= 1e-12

    def test_su11(self):
        m = 2
        rep = roi.moment_check(seqcore.su11_sequence(m), roi.su11_measure(m), 10)
        assert rep.max_residual <= 1e-9

    def test_wrong_measure_fails(self):
        rep = roi.moment_check(seqcore.su2_sequence(4), roi.poisson_measure(), 4)
        assert rep.max_residual > 1e-2

    def test_divergent(self):
        flat = roi.RadialMeasure(lambda lam: np.where(lam > 0, np.inf, 0.0), (0.0, 1.0), "inf", "legendre")
        with pytest.raises(DivergentIntegral):
            roi.moment_check(seqcore.poisson_sequence(), flat, 2)

    def test_k_range(self):
        with pytest.raises(IndexOutOfRange):
            roi.moment_check(seqcore.su2_sequence(3), roi.su2_measure(3), 5)


class TestRuleSelfTest:
    @pytest.mark.parametrize("n", [2, 16, 64])
    def test_all_domains(self, n):
        assert roi.rule_self_test(roi.gauss_legendre(-1.0, 1.0, n)) <= 1e-13
        assert roi.rule_self_test(roi.gauss_legendre(0.0, 3.0, n), (0.0, 3.0)) <= 1e-13
        assert roi.rule_self_test(roi.gauss_laguerre(n)) <= 1e-13
        assert roi.rule_self_test(roi.mapped_legendre(n)) <= 1e-13


class TestGram:
    def test_poisson_sequence_basis(self):
        G = roi.gram_matrix(seqcore.poisson_sequence(), roi.poisson_measure(), size=8)
        assert roi.gram_residual(G) <= 1e-8

    def test_poisson_family(self):
        fam = d.poisson_family()
        G = roi.gram_matrix(fam, fam.canonical_prior, size=8, c=np.ones(fam.n_count))
        assert roi.gram_residual(G) <= 1e-8

    def test_size_one(self):
        G = roi.gram_matrix(seqcore.poisson_sequence(), roi.poisson_measure(), size=1)
        assert G.shape == (1, 1)
        assert G[0, 0] == pytest.approx(1.0, abs=1e-14)

    def test_binomial(self):
        fam = d.binomial_family(4)
        G = roi.gram_matrix(fam, fam.canonical_prior, size=5)
        assert roi.gram_residual(G) <= 1e-10

    def test_continuous(self):
        for psi in (d.gamma_family(), d.beta_first_kind_family(5), d.beta_family(2)):
            assert roi.gram_residual(roi.gram_matrix(psi, size=5)) <= 1e-8

    def test_size_too_big(self):
        with pytest.raises(IndexOutOfRange):
            roi.gram_matrix(d.binomial_family(3), size=5)

    def test_needs_measure(self):
        with pytest.raises(TypeError):
            roi.gram_matrix(seqcore.poisson_sequence(), None)

    @settings(max_examples=10, deadline=None)
    @given(st.integers(1, 10))
    def test_symmetric_psd(self, N):
        G = roi.gram_matrix(seqcore.su2_sequence(N), roi.su2_measure(N), size=N + 1)
        np.testing.assert_allclose(G, G.T, atol=1e-15)
        assert np.min(np.linalg.eigvalsh(G)) > 0


class TestDirectROI:
    def test_poisson(self):
        fam = d.poisson_family()
        res = roi.roi_check_direct(fam, size=6, c=np.ones(fam.n_count))
        assert res.residual <= 1e-6

    def test_size_one(self):
        fam = d.poisson_family()
        res = roi.roi_check_direct(fam, size=1, c=np.ones(fam.n_count))
        assert res.matrix[0, 0].real == pytest.approx(1.0, abs=1e-8)

    def test_agrees_with_gram(self):
        fam = d.binomial_family(5)
        res = roi.roi_check_direct(fam, size=6)
        G = roi.gram_matrix(fam, size=6)
        assert np.max(np.abs(res.matrix - G)) <= 1e-10

    def test_negbinomial(self):
        fam = d.negbinomial_family(2)
        assert roi.roi_check_direct(fam, size=6).residual <= 1e-8

    def test_angular_integral(self):
        assert roi.angular_integral(0) == pytest.approx(2 * math.pi, abs=1e-14)
        for k in (1, 5, 127):
            assert abs(roi.angular_integral(k)) <= 1e-12


class TestPsiNormalization:
    def test_gamma(self):
        assert roi.psi_normalization_check(d.gamma_family(), 0) <= 1e-12

    def test_beta(self):
        assert roi.psi_normalization_check(d.beta_family(3), 2) <= 1e-12

    def test_beta_first_kind(self):
        assert roi.psi_normalization_check(d.beta_first_kind_family(3), 1) <= 1e-8

    def test_range(self):
        with pytest.raises(IndexOutOfRange):
            roi.psi_normalization_check(d.beta_first_kind_family(3), 4)
