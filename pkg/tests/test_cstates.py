import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import gammaln

from csduality import cstates as cs
from csduality import distfam as d
from csduality import roi, seqcore
from csduality.errors import (
    CertificateFailed,
    DimensionMismatch,
    DivergentNormalizer,
    IndexOutOfRange,
    OutOfDomain,
)

POISSON = seqcore.poisson_sequence()


class TestLabel:
    def test_z_convention(self):
        lab = cs.CSLabel(4.0, math.pi / 2)
        assert lab.z == pytest.approx(-2j, abs=1e-15)

    def test_theta_wraps(self):
        assert cs.CSLabel(1.0, -math.pi / 2).theta == pytest.approx(1.5 * math.pi)

    @settings(max_examples=50)
    @given(st.floats(-3, 3), st.floats(-3, 3))
    def test_from_z_round_trip(self, re, im):
        z = complex(re, im)
        assert cs.CSLabel.from_z(z).z == pytest.approx(z, abs=1e-12)

    @pytest.mark.parametrize("lam", [-1.0, math.inf, math.nan])
    def test_bad_lambda(self, lam):
        with pytest.raises(OutOfDomain):
            cs.CSLabel(lam)


class TestNonlinear:
    def test_vacuum(self):
        st0 = cs.cs_nonlinear(POISSON, cs.CSLabel(0.0))
        assert st0.coeffs[0] == 1.0
        assert np.all(st0.coeffs[1:] == 0)

    def test_poisson_probabilities(self):
        st1 = cs.cs_nonlinear(POISSON, cs.CSLabel(1.0))
        n = np.arange(20)
        np.testing.assert_allclose(st1.probabilities()[:20], [d.pmf_poisson(k, 1.0) for k in n], rtol=1e-13)

    def test_su2(self):
        st1 = cs.cs_nonlinear(seqcore.su2_sequence(4), cs.CSLabel(1.0))
        assert st1.probabilities()[2] == pytest.approx(6 / 16, rel=1e-14)
        assert len(st1) == 5

    def test_coefficients_are_powers_of_z(self):
        lab = cs.CSLabel(2.0, 0.7)
        st1 = cs.cs_nonlinear(POISSON, lab)
        k = np.arange(10)
        expect = np.exp(-lab.lam / 2) * lab.z**k / np.sqrt(np.exp(gammaln(k + 1)))
        np.testing.assert_allclose(st1.coeffs[:10], expect, rtol=1e-13)

    @settings(max_examples=30, deadline=None)
    @given(st.floats(0, 30), st.floats(0, 2 * math.pi))
    def test_unit_norm(self, lam, theta):
        assert cs.cs_nonlinear(POISSON, cs.CSLabel(lam, theta)).norm() == pytest.approx(1.0, abs=1e-12)

    def test_to_dict(self):
        out = cs.cs_nonlinear(seqcore.su2_sequence(2), cs.CSLabel(1.0)).to_dict()
        assert out["coeffs"][1] == [pytest.approx(math.sqrt(0.5)), 0.0]


class TestFromFamilies:
    def test_poisson_family_matches_nonlinear(self):
        fam = d.poisson_family()
        cert = d.certify(fam, closed_form=True, lambda_grid=[1.5])
        lab = cs.CSLabel(1.5, 0.4)
        a = cs.cs_from_discrete(fam, cert, lab)
        b = cs.cs_nonlinear(POISSON, lab)
        n = min(len(a), len(b))
        np.testing.assert_allclose(a.coeffs[:n], b.coeffs[:n], atol=1e-12)

    def test_binomial(self):
        fam = d.binomial_family(4)
        cert = d.certify(fam, closed_form=True, lambda_grid=[1.0])
        got = cs.cs_from_discrete(fam, cert, cs.CSLabel(1.0)).coeffs
        expect = np.sqrt([math.comb(4, n) / 16 for n in range(5)])
        np.testing.assert_allclose(got, expect, atol=1e-14)

    def test_theta_pi_phase(self):
        fam = d.binomial_family(4)
        cert = d.certify(fam, closed_form=True, lambda_grid=[1.0])
        a = cs.cs_from_discrete(fam, cert, cs.CSLabel(1.0, 0.0)).coeffs
        b = cs.cs_from_discrete(fam, cert, cs.CSLabel(1.0, math.pi)).coeffs
        assert b[1] == pytest.approx(-a[1], abs=1e-15)
        assert b[2] == pytest.approx(a[2], abs=1e-15)

    def test_failed_certificate(self):
        fam = d.binomial_family(2)
        cert = d.check_convergence(fam, [1.0, 0.0, 1.0], [1.0])
        with pytest.raises(CertificateFailed):
            cs.cs_from_discrete(fam, cert, cs.CSLabel(1.0))

    def test_outside_interval(self):
        fam = d.negbinomial_family(2)
        cert = d.certify(fam, closed_form=True, lambda_grid=[0.5])
        with pytest.raises(OutOfDomain):
            cs.cs_from_discrete(fam, cert, cs.CSLabel(1.5))

    def test_gamma_dual_fidelity(self):
        a = cs.cs_from_continuous(d.gamma_family(), 2.0)
        b = cs.cs_nonlinear(POISSON, cs.CSLabel(2.0))
        n = min(len(a), len(b))
        assert abs(np.vdot(a.coeffs[:n], b.coeffs[:n])) == pytest.approx(1.0, abs=1e-10)

    def test_single_level(self):
        psi = d.ContinuousFamily("one", lambda n, lam: np.exp(-lam), (0.0, math.inf), 1, True, "laguerre")
        st1 = cs.cs_from_continuous(psi, 0.7)
        np.testing.assert_allclose(st1.coeffs, [1.0])

    def test_beta_dual_term_by_term(self):
        m, lam = 2, 0.5
        st1 = cs.cs_from_continuous(d.beta_family(m), lam)
        n = np.arange(len(st1))
        logc = gammaln(m + n + 2) - gammaln(m + 2) - gammaln(n + 1)
        raw = np.exp(0.5 * logc + (m / 2 + 1) * math.log(lam) + 0.5 * n * math.log1p(-lam))
        np.testing.assert_allclose(st1.coeffs.real, raw / np.linalg.norm(raw), atol=1e-14)

    def test_divergent_normalizer(self):
        # sum_n beta(lam; m+1, n+1) = (m+1) / lam^2, so the series blows up at 0
        with pytest.raises(DivergentNormalizer):
            cs.cs_from_continuous(d.beta_family(2), 1e-3)
        with pytest.raises(DivergentNormalizer):
            cs.cs_from_continuous(d.beta_family(2), 0.0)
        assert cs.cs_from_continuous(d.beta_family(2), 0.5).norm_factor == pytest.approx(
            3 / 0.25 / (2 * math.pi), rel=1e-12
        )


class TestOverlapsAndProbs:
    def test_self_overlap(self):
        a = cs.cs_nonlinear(POISSON, cs.CSLabel(2.3, 1.1))
        assert cs.overlap(a, a) == pytest.approx(1.0, abs=1e-12)

    def test_poisson_overlap_with_vacuum(self):
        a = cs.cs_nonlinear(POISSON, cs.CSLabel(1.0))
        b = cs.cs_nonlinear(POISSON, cs.CSLabel(0.0))
        assert abs(cs.overlap(a, b)) == pytest.approx(math.exp(-0.5), rel=1e-13)

    @settings(max_examples=25, deadline=None)
    @given(st.complex_numbers(max_magnitude=3), st.complex_numbers(max_magnitude=3))
    def test_bargmann_overlap(self, z1, z2):
        a = cs.cs_nonlinear(POISSON, cs.CSLabel.from_z(z1))
        b = cs.cs_nonlinear(POISSON, cs.CSLabel.from_z(z2))
        expect = cmath.exp(-abs(z1) ** 2 / 2 - abs(z2) ** 2 / 2 + z1.conjugate() * z2)
        assert cs.overlap(a, b) == pytest.approx(expect, abs=1e-12)

    def test_mismatch(self):
        a = cs.cs_nonlinear(seqcore.su2_sequence(3), cs.CSLabel(1.0))
        b = cs.cs_nonlinear(seqcore.su2_sequence(4), cs.CSLabel(1.0))
        with pytest.raises(DimensionMismatch):
            cs.overlap(a, b)

    def test_prob_extract(self):
        a = cs.cs_nonlinear(POISSON, cs.CSLabel(1.0))
        assert cs.prob_extract(a, 0) == pytest.approx(math.exp(-1), rel=1e-14)
        assert sum(cs.prob_extract(a, n) for n in range(len(a))) == pytest.approx(1.0, abs=1e-12)
        b = cs.cs_nonlinear(seqcore.su2_sequence(4), cs.CSLabel(1.0))
        assert cs.prob_extract(b, 2) == pytest.approx(d.pmf_binomial(2, 4, 0.5), rel=1e-14)
        with pytest.raises(IndexOutOfRange):
            cs.prob_extract(b, 5)


class TestKernels:
    def test_bargmann_at_one(self):
        ke = cs.monomial_kernel(seqcore.poisson_sequence(60))
        assert cs.kernel_eval(ke, cs.CSLabel(1.0), cs.CSLabel(1.0)).real == pytest.approx(math.e, abs=1e-10)

    def test_diagonal_positive(self):
        ke = cs.monomial_kernel(seqcore.su2_sequence(5))
        x = cs.CSLabel(0.8, 2.0)
        k = cs.kernel_eval(ke, x, x)
        assert abs(k.imag) < 1e-15
        assert k.real == pytest.approx(np.sum(np.abs(ke.basis(x)) ** 2), rel=1e-13)

    def test_series_matches_basis_sum(self):
        ke = cs.monomial_kernel(seqcore.su2_sequence(6))
        x, y = cs.CSLabel(0.5, 0.3), cs.CSLabel(1.7, 2.2)
        direct = np.sum(ke.basis(x) * np.conj(ke.basis(y)))
        assert cs.kernel_eval(ke, x, y) == pytest.approx(direct, abs=1e-13)

    @settings(max_examples=5, deadline=None)
    @given(st.complex_numbers(max_magnitude=1.5), st.complex_numbers(max_magnitude=1.5))
    def test_poisson_reproducing(self, zx, zy):
        ke = cs.monomial_kernel(seqcore.poisson_sequence(80))
        x, y = cs.CSLabel.from_z(zx), cs.CSLabel.from_z(zy)
        assert cs.kernel_reproducing_check(ke, roi.poisson_measure(), x, y) <= 1e-6

    def test_origin(self):
        ke = cs.monomial_kernel(seqcore.poisson_sequence(60))
        o = cs.CSLabel(0.0)
        assert cs.kernel_eval(ke, o, o) == pytest.approx(1.0, abs=1e-15)
        assert cs.kernel_reproducing_check(ke, roi.poisson_measure(), o, o) <= 1e-12

    def test_su2_reproducing(self):
        ke = cs.monomial_kernel(seqcore.su2_sequence(4))
        x, y = cs.CSLabel(0.6, 1.0), cs.CSLabel(2.0, 4.0)
        assert cs.kernel_reproducing_check(ke, roi.su2_measure(4), x, y) <= 1e-8

    def test_l2_kernel_reproducing(self):
        ke = cs.l2_kernel(d.beta_first_kind_family(4))
        x, y = cs.CSLabel(0.6, 1.0), cs.CSLabel(2.0, 4.0)
        assert cs.kernel_reproducing_check(ke, None, x, y) <= 1e-8
