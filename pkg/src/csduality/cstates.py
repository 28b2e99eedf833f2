"""Coherent-state coefficient vectors and reproducing kernels.

Convention: a label (lambda, theta) has z = sqrt(lambda) e^{-i theta}.
Basis functions carry e^{+i n theta}, and state coefficients are their
complex conjugates, so coefficient n is proportional to z^n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import seqcore
from .distfam import ContinuousFamily, DiscreteFamily, DualityCertificate
from .errors import (
    CertificateFailed,
    DimensionMismatch,
    DivergentNormalizer,
    IndexOutOfRange,
    OutOfDomain,
)
from .quadrature import radial_rule, trapezoid_angles
from .seqcore import FactorialSequence, SeriesTruncation

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class CSLabel:
    lam: float
    theta: float = 0.0

    def __post_init__(self):
        lam = float(self.lam)
        if not (lam >= 0 and math.isfinite(lam)):
            raise OutOfDomain(f"lambda must be finite and >= 0, got {self.lam}")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "theta", float(self.theta) % TWO_PI)

    @classmethod
    def from_z(cls, z: complex) -> "CSLabel":
        z = complex(z)
        return cls(abs(z) ** 2, -math.atan2(z.imag, z.real))

    @property
    def z(self) -> complex:
        return math.sqrt(self.lam) * complex(math.cos(self.theta), -math.sin(self.theta))

    def to_dict(self) -> dict:
        z = self.z
        return {"lambda": self.lam, "theta": self.theta, "z": [z.real, z.imag]}


@dataclass(frozen=True, eq=False)
class CoherentState:
    coeffs: np.ndarray
    label: CSLabel
    norm_factor: float
    source: str = ""

    def __len__(self):
        return self.coeffs.shape[0]

    def norm(self) -> float:
        return float(np.sum(np.abs(self.coeffs) ** 2))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.coeffs) ** 2

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "label": self.label.to_dict(),
            "norm_factor": self.norm_factor,
            "coeffs": [[float(c.real), float(c.imag)] for c in self.coeffs],
        }


def _phases(theta: float, count: int) -> np.ndarray:
    return np.exp(-1j * theta * np.arange(count))


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.complex128)
    a.setflags(write=False)
    return a


def cs_nonlinear(seq: FactorialSequence, label: CSLabel, trunc: Optional[SeriesTruncation] = None) -> CoherentState:
    """coeff_k = N(lambda)^{-1/2} z^k / sqrt(x_k!)."""
    nv = seqcore.normalization(seq, label.lam, trunc)
    count = nv.terms_used
    logt = seqcore.log_terms(seq, [label.lam], count)[0]
    amp = np.exp(0.5 * (logt - nv.log_value))
    return CoherentState(_frozen(amp * _phases(label.theta, count)), label, nv.value, f"nonlinear:{seq.name}")


def cs_from_discrete(family: DiscreteFamily, cert: DualityCertificate, label: CSLabel) -> CoherentState:
    """coeff_n = N(lambda)^{-1/2} (P(n, lambda) / c_n)^{1/2} e^{-i n theta}."""
    if not cert.passed:
        raise CertificateFailed(f"duality certificate for {family.name} did not pass")
    a, b = family.interval
    if not a <= label.lam <= b or (label.lam == b and not math.isfinite(b)):
        raise OutOfDomain(f"lambda={label.lam} outside [{a}, {b}]")
    c = np.asarray(cert.c, dtype=np.float64)
    n = np.arange(c.size)
    with np.errstate(divide="ignore", invalid="ignore"):
        logr = family.log_pmf(n, np.float64(label.lam)) - np.log(c)
    logr = np.where(np.isnan(logr), -np.inf, logr)
    top = np.max(logr)
    if not np.isfinite(top):
        raise OutOfDomain(f"all probabilities vanish at lambda={label.lam}")
    ratio = np.exp(logr - top)
    total = float(np.sum(ratio))
    amp = np.sqrt(ratio / total)
    norm = total * math.exp(top)
    return CoherentState(_frozen(amp * _phases(label.theta, c.size)), label, norm, f"discrete:{family.name}")


def cs_from_continuous(
    psi: ContinuousFamily, lam: float, theta: float = 0.0, tail_tol: float = seqcore.DEFAULT_TAIL_TOL
) -> CoherentState:
    """coeff_n = (2 pi N~)^{-1/2} Psi_n(lambda)^{1/2} e^{-i n theta}, N~ = (1/2 pi) sum Psi_n."""
    label = CSLabel(lam, theta)
    a, b = psi.support
    if not a <= label.lam <= b:
        raise OutOfDomain(f"lambda={lam} outside [{a}, {b}]")
    with np.errstate(all="ignore"):
        vals = np.asarray(psi.table([label.lam])[0], dtype=np.float64)
    total = float(np.sum(vals))
    if not (math.isfinite(total) and total > 0):
        raise DivergentNormalizer(f"sum of Psi_n at lambda={lam} is {total}")
    if not psi.finite and vals.size >= 2 and vals[-1] > 0:
        ratio = vals[-1] / vals[-2] if vals[-2] > 0 else math.inf
        tail = vals[-1] / total * (ratio / (1.0 - ratio) if ratio < 1 else math.inf)
        if tail > tail_tol:
            raise DivergentNormalizer(f"normalizer tail {tail:.3g} exceeds {tail_tol:.3g}")
    amp = np.sqrt(vals / total)
    return CoherentState(
        _frozen(amp * _phases(label.theta, vals.size)), label, total / TWO_PI, f"continuous:{psi.name}"
    )


def overlap(a: CoherentState, b: CoherentState) -> complex:
    """<a|b> = sum conj(a_n) b_n."""
    if len(a) != len(b):
        raise DimensionMismatch(f"basis lengths differ: {len(a)} vs {len(b)}")
    return complex(np.vdot(a.coeffs, b.coeffs))


def prob_extract(cs: CoherentState, n: int) -> float:
    """|<phi_n|z>|^2."""
    if not 0 <= n < len(cs):
        raise IndexOutOfRange(f"n={n} outside 0..{len(cs) - 1}")
    return float(abs(cs.coeffs[n]) ** 2)


# ---------------------------------------------------------------------------
# reproducing kernels
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class KernelEvaluator:
    """Basis Phi_k(lambda, theta) for k < n_terms with K(x, y) = sum Phi_k(x) conj(Phi_k(y)).

    ``phi(lam, theta)`` takes equal-shape arrays and returns shape
    (..., n_terms). ``seq`` is set for the monomial form, whose kernel is
    the power series sum (conj(z_x) z_y)^k / x_k! summed with tail control.
    """

    name: str
    phi: Callable
    n_terms: int
    support: tuple
    hint: str = "mapped"
    seq: Optional[FactorialSequence] = None

    def basis(self, label: CSLabel) -> np.ndarray:
        return self.phi(np.array([label.lam]), np.array([label.theta]))[0]


def monomial_kernel(seq: FactorialSequence) -> KernelEvaluator:
    """Phi_k(z) = conj(z)^k / sqrt(x_k!), square integrable against d(rho-bar) d(theta)."""
    count = seq.n_max + 1
    L = seqcore.radius_of_convergence(seq).value

    def phi(lam, theta):
        lam = np.asarray(lam, dtype=np.float64)
        theta = np.asarray(theta, dtype=np.float64)
        logt = seqcore.log_terms(seq, lam.ravel(), count).reshape(lam.shape + (count,))
        k = np.arange(count)
        return np.exp(0.5 * logt) * np.exp(1j * theta[..., None] * k)

    hint = "laguerre" if seq.name == "poisson" else ("legendre" if math.isfinite(L) else "mapped")
    return KernelEvaluator(f"monomial:{seq.name}", phi, count, (0.0, L), hint, seq)


def l2_kernel(psi: ContinuousFamily) -> KernelEvaluator:
    """Phi_n(lambda, theta) = Psi_n(lambda)^{1/2} e^{i n theta} / sqrt(2 pi) in L2(d(lambda) d(theta))."""
    count = psi.n_count

    def phi(lam, theta):
        lam = np.asarray(lam, dtype=np.float64)
        theta = np.asarray(theta, dtype=np.float64)
        with np.errstate(all="ignore"):
            tab = psi.table(lam.ravel()).reshape(lam.shape + (count,))
        amp = np.sqrt(np.clip(np.nan_to_num(tab), 0.0, None) / TWO_PI)
        return amp * np.exp(1j * theta[..., None] * np.arange(count))

    return KernelEvaluator(f"l2:{psi.name}", phi, count, tuple(psi.support), psi.hint)


def kernel_eval(ke: KernelEvaluator, x: CSLabel, y: CSLabel, trunc: Optional[SeriesTruncation] = None) -> complex:
    """K(x, y)."""
    if ke.seq is not None:
        # sum_k (conj(z_x) z_y)^k / x_k!; Phi_k(x) = conj(z_x)^k / sqrt(x_k!)
        w = np.conj(x.z) * y.z
        return complex(seqcore.complex_series(ke.seq, w, trunc)[0])
    fx = ke.basis(x)
    fy = ke.basis(y)
    return complex(np.sum(fx * np.conj(fy)))


def kernel_reproducing_check(
    ke: KernelEvaluator,
    measure,
    x: CSLabel,
    y: CSLabel,
    radial_nodes: int = 64,
    angular_nodes: int = 128,
) -> float:
    """|int K(x, z) K(z, y) d(mu)(z) - K(x, y)| by radial Gauss x angular trapezoid.

    ``measure`` is the radial part of d(mu): a RadialMeasure for the
    monomial form, or ``None`` for plain d(lambda) on the basis support.
    """
    if measure is None:
        r = radial_rule(ke.support, radial_nodes, ke.hint)
        lam, wr = r.nodes, r.weights
    else:
        lam, wr = measure.rule(radial_nodes)
    theta, wt = trapezoid_angles(angular_nodes)
    keep = wr > 0
    lam, wr = lam[keep], wr[keep]
    L, T = np.meshgrid(lam, theta, indexing="ij")
    F = ke.phi(L, T)  # (r, t, k)
    fx = ke.basis(x)
    fy = ke.basis(y)
    k_xz = np.conj(F) @ fx  # K(x, z) = sum_k Phi_k(x) conj(Phi_k(z))
    k_zy = F @ np.conj(fy)
    integral = np.sum(wr[:, None] * wt[None, :] * k_xz * k_zy)
    return float(abs(integral - kernel_eval(ke, x, y)))
