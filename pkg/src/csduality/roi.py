"""Moment conditions, Gram matrices and resolution-of-identity checks."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.special import betaln, gammaln

from . import quadrature
from .distfam import (
    ContinuousFamily,
    DiscreteFamily,
    PriorMeasure,
    _moment_integral,
    compute_cn,
)
from .errors import DivergentIntegral, IndexOutOfRange
from .quadrature import (  # noqa: F401  re-exported rule generators
    QuadratureRule,
    gauss_laguerre,
    gauss_legendre,
    mapped_legendre,
    radial_rule,
    trapezoid_angles,
)
from .seqcore import FactorialSequence


@dataclass(frozen=True, eq=False)
class RadialMeasure:
    """d(rho-bar)(lambda) = density(lambda) d(lambda) on ``support``.

    When ``reduced`` is given the density is e^{-lambda} * reduced(lambda)
    and integrals use the unfolded Gauss-Laguerre rule.
    """

    density: Callable
    support: tuple
    name: str = "measure"
    hint: str = "mapped"
    reduced: Optional[Callable] = None

    def rule(self, nodes: int):
        """Nodes and weights with sum(w * f(x)) ~ int f d(rho-bar)."""
        if self.reduced is not None:
            r = gauss_laguerre(nodes)
            return r.nodes, r.weights * self.reduced(r.nodes)
        r = radial_rule(self.support, nodes, self.hint)
        with np.errstate(all="ignore"):
            w = r.weights * self.density(r.nodes)
        return r.nodes, np.nan_to_num(w)

    def integrate(self, f, nodes: int = 64) -> float:
        x, w = self.rule(nodes)
        return float(np.sum(w * f(x)))

    def moment(self, s: float, rel_tol: float = 1e-10) -> float:
        """int lambda^s d(rho-bar) for real s (adaptive, any exponent)."""
        a, b = self.support
        f = lambda lam: float(lam**s * self.density(np.float64(lam)))
        return quadrature.adaptive(f, a, b, rel_tol)


def poisson_measure() -> RadialMeasure:
    """e^{-lambda} d(lambda) / 2 pi, solving the moment problem for x_k! = k!."""
    inv = 1.0 / (2.0 * math.pi)
    return RadialMeasure(
        lambda lam: inv * np.exp(-lam),
        (0.0, math.inf),
        "poisson",
        "laguerre",
        reduced=lambda lam: np.full(np.shape(lam), inv),
    )


def su2_measure(N: int) -> RadialMeasure:
    """(N + 1) / (2 pi (1 + lambda)^{N+2}) for x_k! = k! (N - k)! / N!."""
    c = (N + 1) / (2.0 * math.pi)
    return RadialMeasure(lambda lam: c / (1.0 + lam) ** (N + 2), (0.0, math.inf), f"su2(N={N})", "mapped")


def su11_measure(m: int) -> RadialMeasure:
    """(m + 1)(1 - w)^m / 2 pi on [0, 1] for x_k! = Gamma(m+2) k! / Gamma(m+k+2)."""
    c = (m + 1) / (2.0 * math.pi)
    return RadialMeasure(lambda w: c * (1.0 - w) ** m, (0.0, 1.0), f"su11(m={m})", "legendre")


def lebesgue_measure(support=(0.0, math.inf), hint: str = "mapped") -> RadialMeasure:
    return RadialMeasure(
        lambda lam: np.ones(np.shape(lam)), (float(support[0]), float(support[1])), "lebesgue", hint
    )


def measure_for(seq: FactorialSequence) -> RadialMeasure:
    """The known moment-problem solution for a built-in sequence."""
    if seq.name == "poisson":
        return poisson_measure()
    if seq.name == "su2":
        return su2_measure(seq.params["N"])
    if seq.name == "su11":
        return su11_measure(seq.params["m"])
    raise KeyError(f"no moment measure known for sequence {seq.name!r}")


# ---------------------------------------------------------------------------
# quadrature self-test
# ---------------------------------------------------------------------------


def rule_self_test(rule: QuadratureRule, interval=(-1.0, 1.0)) -> float:
    """Largest relative error over the monomial basis up to the design degree.

    ``interval`` is only used for bounded rules. Monomials are taken about
    the left end point so that no exact value vanishes.
    """
    errs = []
    d = rule.degree
    x, w = rule.nodes, rule.weights
    a, b = interval
    for k in range(d + 1):
        if rule.domain == "laguerre":
            exact = math.exp(gammaln(k + 1))
            got = np.sum(w * x**k)
        elif rule.domain == "laguerre-folded":
            exact = math.exp(gammaln(k + 1))
            got = np.sum(w * np.exp(-x) * x**k)
        elif rule.domain == "mapped":
            # x^k / (1 + x)^{d+2} is a degree-d polynomial after the map
            exact = math.exp(betaln(k + 1, d - k + 1))
            got = np.sum(w * np.exp(k * np.log(x) - (d + 2) * np.log1p(x)))
        else:
            exact = (b - a) ** (k + 1) / (k + 1)
            got = np.sum(w * (x - a) ** k)
        errs.append(abs(got - exact) / abs(exact))
    return float(max(errs))


# ---------------------------------------------------------------------------
# moment condition
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MomentReport:
    k: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    residuals: np.ndarray

    @property
    def max_residual(self) -> float:
        return float(np.max(self.residuals)) if self.residuals.size else 0.0


def moment_check(seq: FactorialSequence, measure: RadialMeasure, k_max: int, nodes: int = 64) -> MomentReport:
    """Compare x_k!/(2 pi) with int lambda^k d(rho-bar) for k = 0..k_max."""
    if not 0 <= k_max <= seq.n_max:
        raise IndexOutOfRange(f"k_max={k_max} outside 0..{seq.n_max}")
    k = np.arange(k_max + 1)
    lhs = np.exp(seq.log_factorials[: k_max + 1]) / (2.0 * math.pi)
    x, w = measure.rule(nodes)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        powers = np.where(k[:, None] == 0, 1.0, x[None, :] ** k[:, None])
        rhs = powers @ w
    if not np.all(np.isfinite(rhs)):
        raise DivergentIntegral("moment integral is not finite")
    return MomentReport(k, lhs, rhs, np.abs(rhs - lhs) / lhs)


# ---------------------------------------------------------------------------
# Gram matrix and resolution of identity
# ---------------------------------------------------------------------------


def _c_values(family: DiscreteFamily, prior: PriorMeasure, count: int, c=None) -> np.ndarray:
    if c is not None:
        c = np.asarray(c, dtype=np.float64)
        if c.size < count:
            raise IndexOutOfRange("not enough c_n values supplied")
        return c[:count]
    return np.array([compute_cn(family, prior, n) for n in range(count)])


def _family_rule(family_like, support, nodes):
    return radial_rule(support, nodes, family_like.hint)


def gram_matrix(basis, prior=None, size: int = 8, nodes: int = 64, c=None) -> np.ndarray:
    """G_mn = int int conj(Phi_m) Phi_n over lambda and theta.

    ``basis`` may be a DiscreteFamily (with a PriorMeasure), a
    ContinuousFamily, or a FactorialSequence (with a RadialMeasure). The
    theta integral contributes 2 pi delta_mn and is applied analytically.
    """
    if isinstance(basis, FactorialSequence):
        if not isinstance(prior, RadialMeasure):
            raise TypeError("a sequence basis needs a RadialMeasure")
        if size > basis.n_max + 1:
            raise IndexOutOfRange("size exceeds the basis length")
        x, w = prior.rule(nodes)
        k = np.arange(size)
        with np.errstate(divide="ignore", invalid="ignore"):
            logx = np.log(x)
            half = 0.5 * (k[:, None] * logx[None, :] - basis.log_factorials[:size, None])
            half[0, :] = -0.5 * basis.log_factorials[0]
            phi = np.exp(half)
        radial = (phi * w[None, :]) @ phi.T
        return 2.0 * math.pi * radial * np.eye(size)

    if isinstance(basis, DiscreteFamily):
        prior = prior or basis.canonical_prior
        if size > basis.n_count:
            raise IndexOutOfRange("size exceeds the family range")
        cvals = _c_values(basis, prior, size, c)
        support = (max(basis.interval[0], prior.support[0]), min(basis.interval[1], prior.support[1]))
        rule = _family_rule(basis, support, nodes)
        lam = rule.nodes
        psi = basis.pmf_table(lam)[:, :size] * prior(lam)[:, None] / cvals[None, :]
    elif isinstance(basis, ContinuousFamily):
        if size > basis.n_count:
            raise IndexOutOfRange("size exceeds the family range")
        rule = _family_rule(basis, basis.support, nodes)
        lam = rule.nodes
        psi = np.stack([basis.pdf(n, lam) for n in range(size)], axis=1)
    else:
        raise TypeError(f"unsupported basis {type(basis).__name__}")
    root = np.sqrt(np.clip(psi, 0.0, None))
    radial = (root.T * rule.weights[None, :]) @ root
    angular = np.eye(size)
    return radial * angular


def gram_residual(G: np.ndarray) -> float:
    return float(np.max(np.abs(G - np.eye(G.shape[0]))))


@dataclass(frozen=True)
class ROIResult:
    matrix: np.ndarray
    residual: float


def roi_check_direct(
    family: DiscreteFamily,
    prior: Optional[PriorMeasure] = None,
    size: int = 6,
    radial_nodes: int = 64,
    angular_nodes: int = 128,
    c=None,
) -> ROIResult:
    """Assemble (1/2 pi) int int |z><z| N(lambda) d(kappa) d(theta) by 2D quadrature.

    Every (lambda, theta) node builds the full coherent-state coefficient
    vector; no angular orthogonality is used.
    """
    prior = prior or family.canonical_prior
    cvals = _c_values(family, prior, family.n_count, c)
    support = (max(family.interval[0], prior.support[0]), min(family.interval[1], prior.support[1]))
    rule = _family_rule(family, support, radial_nodes)
    lam = rule.nodes
    ratio = family.pmf_table(lam) / cvals[None, :]
    norm = ratio.sum(axis=1)
    amp = np.sqrt(ratio[:, :size] / norm[:, None])
    theta, wt = trapezoid_angles(angular_nodes)
    n = np.arange(size)
    phase = np.exp(-1j * np.outer(theta, n))
    # coeff[r, t, n] = amp[r, n] e^{-i n theta_t}
    coeff = amp[:, None, :] * phase[None, :, :]
    weight = rule.weights * norm * prior(lam) / (2.0 * math.pi)
    W = weight[:, None] * wt[None, :]
    M = np.einsum("rt,rtm,rtn->mn", W, coeff, coeff.conj())
    residual = float(np.max(np.abs(M - np.eye(size))))
    return ROIResult(M, residual)


def angular_integral(k: int, nodes: int = 128) -> complex:
    """Trapezoid value of int_0^{2 pi} e^{i k theta} d(theta)."""
    theta, w = trapezoid_angles(nodes)
    return complex(np.sum(w * np.exp(1j * k * theta)))


def psi_normalization_check(psi: ContinuousFamily, n: int, nodes: int = 64) -> float:
    """|int Psi_n d(lambda) - 1|."""
    if not 0 <= n < psi.n_count:
        raise IndexOutOfRange(f"n={n} outside 0..{psi.n_count - 1}")
    total = _moment_integral(lambda lam: psi.pdf(n, lam), psi.support, psi.hint, nodes)
    return abs(total - 1.0)
