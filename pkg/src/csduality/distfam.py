"""Discrete likelihood families, their continuous duals, priors and posteriors.

Conventions: 0^0 = 1 at parameter boundaries, infinite families are
truncated at ``n_max`` (default 256) with a geometric tail estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import betaln, gammaln, xlog1py, xlogy

from . import quadrature
from ._backend import kernels
from .errors import (
    DivergentIntegral,
    IndexOutOfRange,
    NegativeParameter,
    OutOfRange,
    Singular,
    ZeroEvidence,
)
from .seqcore import (
    DEFAULT_TAIL_TOL,
    FactorialSequence,
    default_nmax,
    log_normalization_array,
    poisson_sequence,
    radius_of_convergence,
    su11_sequence,
    su2_sequence,
)


# ---------------------------------------------------------------------------
# closed-form distributions
# ---------------------------------------------------------------------------


def _scalar_or_array(x):
    return float(x) if np.ndim(x) == 0 else x


def pmf_poisson(n: int, lam):
    """e^{-lambda} lambda^n / n!, with pmf(0, 0) = 1."""
    lam = np.asarray(lam, dtype=np.float64)
    if n < 0:
        raise OutOfRange("n must be >= 0")
    if np.any(lam < 0):
        raise NegativeParameter("lambda must be >= 0")
    return _scalar_or_array(np.exp(xlogy(n, lam) - lam - gammaln(n + 1)))


def pmf_binomial(n: int, N: int, p):
    """C(N, n) p^n (1 - p)^{N - n}."""
    p = np.asarray(p, dtype=np.float64)
    if not 0 <= n <= N:
        raise OutOfRange(f"n={n} outside 0..{N}")
    if np.any((p < 0) | (p > 1)):
        raise OutOfRange("p must lie in [0, 1]")
    logc = gammaln(N + 1) - gammaln(n + 1) - gammaln(N - n + 1)
    return _scalar_or_array(np.exp(logc + xlogy(n, p) + xlog1py(N - n, -p)))


def binomial_lambda_from_p(p):
    """lambda = p / (1 - p)."""
    p = np.asarray(p, dtype=np.float64)
    if np.any((p < 0) | (p > 1)):
        raise OutOfRange("p must lie in [0, 1]")
    if np.any(p == 1):
        raise Singular("lambda = p / (1 - p) is singular at p = 1")
    return _scalar_or_array(p / (1.0 - p))


def binomial_p_from_lambda(lam):
    """Inverse map p = lambda / (1 + lambda) = 1 - 1 / (1 + lambda)."""
    lam = np.asarray(lam, dtype=np.float64)
    if np.any(lam < 0):
        raise NegativeParameter("lambda must be >= 0")
    return _scalar_or_array(lam / (1.0 + lam))


def _log_negbinomial(m, n, lam):
    return gammaln(m + n) - gammaln(n + 1) - gammaln(m) + xlogy(m, lam) + xlog1py(n, -lam)


def pmf_negbinomial(m: int, n: int, lam):
    """Gamma(m+n) / (Gamma(n+1) Gamma(m)) lambda^m (1 - lambda)^n on 0 < lambda < 1."""
    lam = np.asarray(lam, dtype=np.float64)
    if m < 1 or n < 0:
        raise OutOfRange("need m >= 1 and n >= 0")
    if np.any((lam <= 0) | (lam >= 1)):
        raise OutOfRange("lambda must lie in (0, 1)")
    return _scalar_or_array(np.exp(_log_negbinomial(m, n, lam)))


def pdf_gamma(n: int, lam):
    """lambda^{n-1} e^{-lambda} / Gamma(n)."""
    lam = np.asarray(lam, dtype=np.float64)
    if n < 1:
        raise OutOfRange("n must be >= 1")
    if np.any(lam < 0):
        raise OutOfRange("lambda must be >= 0")
    return _scalar_or_array(np.exp(xlogy(n - 1, lam) - lam - gammaln(n)))


def pdf_beta(lam, m: int, n: int):
    """lambda^{m-1} (1 - lambda)^{n-1} / B(m, n) on [0, 1]."""
    lam = np.asarray(lam, dtype=np.float64)
    if m < 1 or n < 1:
        raise OutOfRange("need m, n >= 1")
    if np.any((lam < 0) | (lam > 1)):
        raise OutOfRange("lambda must lie in [0, 1]")
    return _scalar_or_array(np.exp(xlogy(m - 1, lam) + xlog1py(n - 1, -lam) - betaln(m, n)))


def pdf_beta_first_kind(lam, n: int, N: int):
    """(N+1)! / ((N-n)! n!) lambda^n / (1 + lambda)^{N+2} on [0, inf)."""
    lam = np.asarray(lam, dtype=np.float64)
    if not 0 <= n <= N:
        raise OutOfRange(f"n={n} outside 0..{N}")
    if np.any(lam < 0):
        raise OutOfRange("lambda must be >= 0")
    logc = gammaln(N + 2) - gammaln(N - n + 1) - gammaln(n + 1)
    return _scalar_or_array(np.exp(logc + xlogy(n, lam) - (N + 2) * np.log1p(lam)))


# ---------------------------------------------------------------------------
# family containers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PriorMeasure:
    """Density of the prior measure with respect to Lebesgue measure."""

    density: Callable
    support: tuple
    name: str = "prior"

    def __call__(self, lam):
        return self.density(np.asarray(lam, dtype=np.float64))


def uniform_prior(support=(0.0, math.inf), scale: float = 1.0) -> PriorMeasure:
    return PriorMeasure(
        lambda lam: np.full(np.shape(lam), scale, dtype=np.float64),
        (float(support[0]), float(support[1])),
        "uniform",
    )


def binomial_lambda_prior(N: int) -> PriorMeasure:
    """(N + 1) / (1 + lambda)^2 on [0, inf), the uniform prior in p."""
    return PriorMeasure(
        lambda lam: (N + 1) / (1.0 + lam) ** 2, (0.0, math.inf), f"binomial-lambda(N={N})"
    )


@dataclass(frozen=True, eq=False)
class DiscreteFamily:
    """n -> P(n, lambda) for n = 0..n_count-1 and lambda in ``interval``.

    ``log_pmf(n, lam)`` broadcasts over integer and real arrays. ``hint``
    selects the radial quadrature (``laguerre``, ``mapped``, ``legendre``).
    ``seq`` is set for families of the power-series (nonlinear) type.
    """

    name: str
    log_pmf: Callable
    n_count: int
    interval: tuple
    finite: bool
    hint: str = "mapped"
    seq: Optional[FactorialSequence] = None
    params: dict = field(default_factory=dict)
    canonical_prior: Optional[PriorMeasure] = None
    canonical_c: Optional[Callable] = None

    def pmf(self, n: int, lam):
        self._check_n(n)
        lam = self._check_lam(np.asarray(lam, dtype=np.float64))
        return _scalar_or_array(np.exp(self.log_pmf(n, lam)))

    def pmf_table(self, lam) -> np.ndarray:
        """P(n, lambda) for all n, shape (len(lam), n_count)."""
        lam = self._check_lam(np.atleast_1d(np.asarray(lam, dtype=np.float64)))
        n = np.arange(self.n_count)
        return np.exp(self.log_pmf(n[None, :], lam[:, None]))

    def log_pmf_table(self, lam) -> np.ndarray:
        lam = np.atleast_1d(np.asarray(lam, dtype=np.float64))
        n = np.arange(self.n_count)
        return np.ascontiguousarray(self.log_pmf(n[None, :], lam[:, None]))

    def _check_lam(self, lam: np.ndarray) -> np.ndarray:
        a, b = self.interval
        if np.any(~np.isfinite(lam)) or np.any(lam < a) or np.any(lam > b):
            raise OutOfRange(f"parameter outside [{a}, {b}]")
        return lam

    def _check_n(self, n):
        if not 0 <= n < self.n_count:
            raise IndexOutOfRange(f"n={n} outside 0..{self.n_count - 1}")


@dataclass(frozen=True, eq=False)
class ContinuousFamily:
    """lambda -> Psi_n(lambda), one probability density per n."""

    name: str
    pdf: Callable
    support: tuple
    n_count: int
    finite: bool
    hint: str = "mapped"
    seq: Optional[FactorialSequence] = None
    params: dict = field(default_factory=dict)

    def __call__(self, n: int, lam):
        if not 0 <= n < self.n_count:
            raise IndexOutOfRange(f"n={n} outside 0..{self.n_count - 1}")
        return self.pdf(n, np.asarray(lam, dtype=np.float64))

    def table(self, lam) -> np.ndarray:
        lam = np.atleast_1d(np.asarray(lam, dtype=np.float64))
        return np.stack([self.pdf(n, lam) for n in range(self.n_count)], axis=1)


@dataclass(frozen=True)
class DualityCertificate:
    c: np.ndarray
    lambdas: np.ndarray
    values: np.ndarray
    tail_bounds: np.ndarray
    conditions: dict
    status: str

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def convergence_value(self, lam: float) -> float:
        """Sampled value of sum_n P(n, lambda) / c_n at a grid point."""
        idx = np.flatnonzero(np.isclose(self.lambdas, lam, rtol=0, atol=1e-15))
        if idx.size == 0:
            raise KeyError(f"lambda={lam} was not sampled")
        return float(self.values[idx[0]])


# ---------------------------------------------------------------------------
# built-in families
# ---------------------------------------------------------------------------


def poisson_family(n_max: Optional[int] = None) -> DiscreteFamily:
    n_max = default_nmax() if n_max is None else n_max

    def log_pmf(n, lam):
        return xlogy(n, lam) - lam - gammaln(n + 1)

    return DiscreteFamily(
        "poisson",
        log_pmf,
        n_max + 1,
        (0.0, math.inf),
        finite=False,
        hint="laguerre",
        seq=poisson_sequence(n_max),
        canonical_prior=uniform_prior((0.0, math.inf)),
        canonical_c=lambda n: 1.0,
    )


def binomial_family(N: int) -> DiscreteFamily:
    """Binomial in lambda = p / q: C(N, n) lambda^n / (1 + lambda)^N."""
    if N < 0:
        raise OutOfRange("N must be >= 0")

    def log_pmf(n, lam):
        logc = gammaln(N + 1) - gammaln(n + 1) - gammaln(N - n + 1)
        return logc + xlogy(n, lam) - N * np.log1p(lam)

    return DiscreteFamily(
        "binomial",
        log_pmf,
        N + 1,
        (0.0, math.inf),
        finite=True,
        hint="mapped",
        seq=su2_sequence(N),
        params={"N": N},
        canonical_prior=binomial_lambda_prior(N),
        canonical_c=lambda n: 1.0,
    )


def binomial_p_family(N: int) -> DiscreteFamily:
    """Binomial in the success probability p on [0, 1]."""
    if N < 0:
        raise OutOfRange("N must be >= 0")

    def log_pmf(n, p):
        logc = gammaln(N + 1) - gammaln(n + 1) - gammaln(N - n + 1)
        return logc + xlogy(n, p) + xlog1py(N - n, -p)

    return DiscreteFamily(
        "binomial-p",
        log_pmf,
        N + 1,
        (0.0, 1.0),
        finite=True,
        hint="legendre",
        params={"N": N},
        canonical_prior=uniform_prior((0.0, 1.0), scale=N + 1.0),
        canonical_c=lambda n: 1.0,
    )


def negbinomial_c(m: int, n: int) -> float:
    """Closed form c_{m,n} = m / ((m + n + 1)(m + n))."""
    return m / ((m + n + 1) * (m + n))


def negbinomial_family(m: int, n_max: Optional[int] = None) -> DiscreteFamily:
    """Negative binomial P(m, n; lambda) on 0 < lambda < 1 with Lebesgue prior.

    Other derivations of this duality arrive at a different prior measure;
    only the Lebesgue one, with c_n = m / ((m + n + 1)(m + n)), is provided.
    """
    if m < 1:
        raise OutOfRange("m must be >= 1")
    n_max = default_nmax() if n_max is None else n_max
    return DiscreteFamily(
        "negbinomial",
        lambda n, lam: _log_negbinomial(m, n, lam),
        n_max + 1,
        (0.0, 1.0),
        finite=False,
        hint="legendre",
        params={"m": m},
        canonical_prior=uniform_prior((0.0, 1.0)),
        canonical_c=lambda n: negbinomial_c(m, n),
    )


def negbinomial_nonlinear_family(m: int, n_max: Optional[int] = None) -> DiscreteFamily:
    """Power-series form in w = 1 - lambda: P(n, w) = P(m + 2, n; 1 - w).

    This is the family generated by x_n = n / (m + n + 1) and is what the
    coherent states of the negative-binomial duality square to.
    """
    if m < 1:
        raise OutOfRange("m must be >= 1")
    n_max = default_nmax() if n_max is None else n_max
    return DiscreteFamily(
        "negbinomial-w",
        lambda n, w: _log_negbinomial(m + 2, n, 1.0 - w),
        n_max + 1,
        (0.0, 1.0),
        finite=False,
        hint="legendre",
        seq=su11_sequence(m, n_max),
        params={"m": m},
        canonical_prior=PriorMeasure(
            lambda w: (m + 1) / (1.0 - w) ** 2, (0.0, 1.0), f"su11-prior(m={m})"
        ),
        canonical_c=lambda n: 1.0,
    )


def from_nonlinear(seq: FactorialSequence) -> DiscreteFamily:
    """P(n, lambda) = lambda^n / (x_n! N(lambda)) on [0, L)."""
    L = radius_of_convergence(seq).value
    logf = seq.log_factorials

    def log_pmf(n, lam):
        n = np.asarray(n)
        lam = np.asarray(lam, dtype=np.float64)
        n_b, lam_b = np.broadcast_arrays(n, lam)
        flat = np.unique(lam_b)
        logn = log_normalization_array(seq, flat)
        lookup = logn[np.searchsorted(flat, lam_b)]
        return xlogy(n_b, lam_b) - logf[n_b] - lookup

    if seq.name == "poisson":
        hint = "laguerre"
    elif math.isfinite(L):
        hint = "legendre"
    else:
        hint = "mapped"
    return DiscreteFamily(
        f"nonlinear:{seq.name}",
        log_pmf,
        seq.n_max + 1,
        (0.0, L),
        finite=not seq.infinite,
        hint=hint,
        seq=seq,
        params=dict(seq.params),
    )


def gamma_family(n_max: Optional[int] = None) -> ContinuousFamily:
    """Psi_n = gamma_{n+1}, dual to the Poisson family."""
    n_max = default_nmax() if n_max is None else n_max
    return ContinuousFamily(
        "gamma",
        lambda n, lam: np.exp(xlogy(n, lam) - lam - gammaln(n + 1)),
        (0.0, math.inf),
        n_max + 1,
        finite=False,
        hint="laguerre",
        seq=poisson_sequence(n_max),
    )


def beta_first_kind_family(N: int) -> ContinuousFamily:
    """Psi_n(lambda) = (N+1)!/((N-n)! n!) lambda^n / (1+lambda)^{N+2}, dual to binomial."""
    return ContinuousFamily(
        "beta-first-kind",
        lambda n, lam: pdf_beta_first_kind(lam, n, N),
        (0.0, math.inf),
        N + 1,
        finite=True,
        hint="mapped",
        seq=su2_sequence(N),
        params={"N": N},
    )


def beta_family(m: int, n_max: Optional[int] = None) -> ContinuousFamily:
    """Psi_{m,n}(lambda) = beta(lambda; m + 1, n + 1), dual to the negative binomial."""
    n_max = default_nmax() if n_max is None else n_max
    return ContinuousFamily(
        "beta",
        lambda n, lam: np.exp(xlogy(m, lam) + xlog1py(n, -lam) - betaln(m + 1, n + 1)),
        (0.0, 1.0),
        n_max + 1,
        finite=False,
        hint="legendre",
        params={"m": m},
    )


def from_measure(seq: FactorialSequence, measure) -> ContinuousFamily:
    """Psi_n(lambda) = 2 pi lambda^n / x_n! * d(rho-bar)/d(lambda).

    ``measure`` is any object with ``density`` and ``support`` (see
    :class:`csduality.roi.RadialMeasure`).
    """
    logf = seq.log_factorials

    def pdf(n, lam):
        lam = np.asarray(lam, dtype=np.float64)
        return 2.0 * math.pi * np.exp(xlogy(n, lam) - logf[n]) * measure.density(lam)

    return ContinuousFamily(
        f"dual:{seq.name}",
        pdf,
        tuple(measure.support),
        seq.n_max + 1,
        finite=not seq.infinite,
        hint=getattr(measure, "hint", "mapped"),
        seq=seq,
        params=dict(seq.params),
    )


def nonlinear_prior(seq: FactorialSequence, measure) -> PriorMeasure:
    """Prior 2 pi N(lambda) d(rho-bar) attached to a nonlinear family."""

    def density(lam):
        lam = np.asarray(lam, dtype=np.float64)
        flat = np.atleast_1d(lam).ravel()
        logn = log_normalization_array(seq, flat).reshape(np.shape(lam))
        return 2.0 * math.pi * np.exp(logn) * measure.density(lam)

    return PriorMeasure(density, tuple(measure.support), f"canonical:{seq.name}")


# ---------------------------------------------------------------------------
# duality conditions
# ---------------------------------------------------------------------------


def _overlap(family: DiscreteFamily, prior: PriorMeasure):
    a = max(family.interval[0], prior.support[0])
    b = min(family.interval[1], prior.support[1])
    if not a < b:
        raise OutOfRange("prior support does not meet the family's parameter interval")
    if prior.support[0] < family.interval[0] or prior.support[1] > family.interval[1]:
        raise OutOfRange("prior must be supported inside the family's parameter interval")
    return a, b


def _peak(f, a: float, b: float) -> float:
    if math.isfinite(b):
        grid = np.linspace(a, b, 513)[1:-1]
    else:
        grid = a + np.geomspace(1e-6, 1e6, 1201)
    with np.errstate(all="ignore"):
        vals = np.nan_to_num(f(grid), nan=-np.inf)
    return float(grid[int(np.argmax(vals))])


def compute_cn(family: DiscreteFamily, prior: PriorMeasure, n: int, rel_tol: float = 1e-9) -> float:
    """c_n = int P(n, lambda) d(kappa), by adaptive Gauss-Kronrod."""
    family._check_n(n)
    a, b = _overlap(family, prior)

    def integrand(lam):
        lam = np.asarray(lam, dtype=np.float64)
        return np.exp(family.log_pmf(n, lam)) * prior(lam)

    peak = _peak(integrand, a, b)
    val = quadrature.adaptive(lambda t: float(integrand(t)), a, b, rel_tol, split=[peak])
    if not val > 0:
        raise DivergentIntegral(f"c_{n} = {val} is not positive")
    return val


def check_convergence(
    family: DiscreteFamily, c, lambda_grid, tail_tol: float = DEFAULT_TAIL_TOL
) -> DualityCertificate:
    """Evaluate sum_n P(n, lambda) / c_n on a grid, with a tail estimate."""
    c = np.asarray(c, dtype=np.float64)
    lam = np.atleast_1d(np.asarray(lambda_grid, dtype=np.float64))
    c_ok = bool(c.size > 0 and np.all(np.isfinite(c)) and np.all(c > 0))
    if c.size > family.n_count:
        raise IndexOutOfRange("more c_n values than family levels")
    if not c_ok:
        return DualityCertificate(
            c, lam, np.full(lam.shape, np.nan), np.full(lam.shape, np.inf),
            {"c_finite": False, "convergence": False}, "fail",
        )
    n = np.arange(c.size)
    logt = np.ascontiguousarray(family.log_pmf(n[None, :], lam[:, None]) - np.log(c)[None, :])
    log_sum = kernels.log_series_rows(logt)
    truncated = (not family.finite) or c.size < family.n_count
    if truncated and c.size >= 2:
        with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
            ratio = np.exp(logt[:, -1] - logt[:, -2])
            rel = np.exp(logt[:, -1] - log_sum) * ratio / (1.0 - ratio)
        rel = np.where(logt[:, -1] == -np.inf, 0.0, rel)
        rel = np.where(ratio >= 1.0, np.inf, rel)
    elif truncated:
        rel = np.full(lam.shape, np.inf)
    else:
        rel = np.zeros(lam.shape)
    values = np.exp(log_sum)
    conv = bool(np.all(np.isfinite(values)) and np.all(rel <= tail_tol))
    status = "pass" if conv else "fail"
    return DualityCertificate(
        c, lam, values, rel, {"c_finite": True, "convergence": conv}, status
    )


def certify(
    family: DiscreteFamily,
    prior: Optional[PriorMeasure] = None,
    lambda_grid=None,
    *,
    closed_form: bool = False,
    tail_tol: float = DEFAULT_TAIL_TOL,
) -> DualityCertificate:
    """Compute every c_n (or take the closed form) and check convergence."""
    prior = prior or family.canonical_prior
    if lambda_grid is None:
        a, b = family.interval
        hi = b if math.isfinite(b) else a + 10.0
        lambda_grid = np.linspace(a, hi, 12)[1:-1]
    if closed_form and family.canonical_c is not None:
        c = [family.canonical_c(n) for n in range(family.n_count)]
    else:
        c = [compute_cn(family, prior, n) for n in range(family.n_count)]
    return check_convergence(family, c, lambda_grid, tail_tol)


@dataclass(frozen=True, eq=False)
class PosteriorDensity:
    """lambda -> P(n_obs, lambda) Pi(lambda) / c_{n_obs}."""

    family: DiscreteFamily
    prior: PriorMeasure
    n_obs: int
    evidence: float
    support: tuple

    def __call__(self, lam):
        lam = np.asarray(lam, dtype=np.float64)
        val = np.exp(self.family.log_pmf(self.n_obs, lam)) * self.prior(lam) / self.evidence
        return _scalar_or_array(val)


def posterior_density(family: DiscreteFamily, prior: PriorMeasure, n_obs: int) -> PosteriorDensity:
    family._check_n(n_obs)
    try:
        evidence = compute_cn(family, prior, n_obs)
    except DivergentIntegral as exc:
        raise ZeroEvidence(f"evidence integral failed: {exc}") from exc
    if not evidence > 1e-300:
        raise ZeroEvidence("evidence underflows")
    return PosteriorDensity(family, prior, n_obs, evidence, _overlap(family, prior))


def posterior_family(family: DiscreteFamily, prior: PriorMeasure, c=None) -> ContinuousFamily:
    """All posteriors Psi_n = P(n, .) Pi / c_n as one continuous family."""
    if c is None:
        c = [compute_cn(family, prior, n) for n in range(family.n_count)]
    c = np.asarray(c, dtype=np.float64)

    def pdf(n, lam):
        return np.exp(family.log_pmf(n, lam)) * prior(lam) / c[n]

    return ContinuousFamily(
        f"posterior:{family.name}",
        pdf,
        _overlap(family, prior),
        c.size,
        finite=family.finite,
        hint=family.hint,
        seq=family.seq,
        params=dict(family.params),
    )


# ---------------------------------------------------------------------------
# expectation identities
# ---------------------------------------------------------------------------


def expectation_Y(family: DiscreteFamily, lam: float) -> float:
    """sum_n x_n P(n, lambda) with x_0 = 0.

    For an infinite power-series family this equals lambda. When the
    sequence stops at N the top level has no successor and the sum is
    lambda * (1 - P(N, lambda)).
    """
    if family.seq is None:
        raise ValueError("expectation_Y needs a family built from a factorial sequence")
    seq = family.seq
    count = min(family.n_count, seq.n_max + 1)
    x = np.concatenate([[0.0], seq.values[: count - 1]])
    p = family.pmf_table([lam])[0, :count]
    return float(kernels.neumaier_sum(np.ascontiguousarray(x * p)))


def expectation_Lambda(psi: ContinuousFamily, n: int, nodes: int = 64) -> float:
    """int lambda Psi_n(lambda) d(lambda); equals x_{n+1} for nonlinear duals."""
    if not 0 <= n < psi.n_count:
        raise IndexOutOfRange(f"n={n} outside 0..{psi.n_count - 1}")
    return _moment_integral(lambda lam: lam * psi.pdf(n, lam), psi.support, psi.hint, nodes)


def _moment_integral(f, support, hint, nodes, rel_tol=1e-10) -> float:
    """Gauss rule at two resolutions; adaptive fallback when they disagree."""
    with np.errstate(all="ignore"):
        r1 = quadrature.radial_rule(support, nodes, hint)
        r2 = quadrature.radial_rule(support, 2 * nodes, hint)
        v1 = r1.integrate(f)
        v2 = r2.integrate(f)
    if math.isfinite(v2) and abs(v1 - v2) <= rel_tol * abs(v2):
        return v2
    a, b = support
    g = lambda t: float(f(np.asarray(t, dtype=np.float64)))
    peak = _peak(lambda x: f(x), a, b)
    return quadrature.adaptive(g, a, b, 1e-9, split=[peak])
