"""Vector coherent states over normal matrices, mixtures and tensor-product states.

A normal matrix Z = U diag(z_1..z_M) U* is only ever stored in this
factored form; every power, kernel and inverse square root acts on the
diagonal and is conjugated by U afterwards.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import seqcore
from ._backend import kernels
from .cstates import CSLabel, CoherentState, cs_nonlinear
from .distfam import DiscreteFamily
from .errors import DimensionMismatch, IndexOutOfRange, OutOfDomain, SizeLimit
from .seqcore import FactorialSequence, SeriesTruncation

MC_BLOCK = 1024
TENSOR_MAX_M = 4
TENSOR_MAX_NMAX = 32


# ---------------------------------------------------------------------------
# Haar unitaries
# ---------------------------------------------------------------------------


def haar_unitaries(M: int, count: int, rng) -> np.ndarray:
    """``count`` independent Haar unitaries, shape (count, M, M).

    QR of a complex Ginibre matrix, with the phases of diag(R) moved into Q
    so the result is exactly Haar distributed.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    rng = np.random.default_rng(rng)
    g = (rng.standard_normal((count, M, M)) + 1j * rng.standard_normal((count, M, M))) / math.sqrt(2.0)
    q, r = np.linalg.qr(g)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (d / np.abs(d))[:, None, :]


def haar_unitary(M: int, seed=None) -> np.ndarray:
    return haar_unitaries(M, 1, seed)[0]


# ---------------------------------------------------------------------------
# labels and kernels
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class NormalMatrixLabel:
    """Z = U diag(z) U* with z_i = sqrt(lambda_i) e^{-i theta_i}."""

    unitary: np.ndarray
    diag: np.ndarray

    def __post_init__(self):
        U = np.array(self.unitary, dtype=np.complex128)
        z = np.array(self.diag, dtype=np.complex128).ravel()
        if U.ndim != 2 or U.shape[0] != U.shape[1]:
            raise DimensionMismatch("unitary must be square")
        if U.shape[0] != z.size:
            raise DimensionMismatch(f"unitary is {U.shape[0]}x{U.shape[0]} but {z.size} eigenvalues given")
        if np.max(np.abs(U @ U.conj().T - np.eye(z.size))) > 1e-10:
            raise ValueError("matrix is not unitary to 1e-10")
        U.setflags(write=False)
        z.setflags(write=False)
        object.__setattr__(self, "unitary", U)
        object.__setattr__(self, "diag", z)

    @classmethod
    def from_params(cls, unitary, lambdas, thetas=None) -> "NormalMatrixLabel":
        lam = np.asarray(lambdas, dtype=np.float64)
        if np.any(lam < 0):
            raise OutOfDomain("lambda_i must be >= 0")
        th = np.zeros_like(lam) if thetas is None else np.asarray(thetas, dtype=np.float64)
        return cls(unitary, np.sqrt(lam) * np.exp(-1j * th))

    @property
    def M(self) -> int:
        return self.diag.size

    @property
    def lambdas(self) -> np.ndarray:
        return np.abs(self.diag) ** 2

    @property
    def thetas(self) -> np.ndarray:
        return np.mod(-np.angle(self.diag), 2.0 * math.pi)

    def matrix(self) -> np.ndarray:
        return (self.unitary * self.diag[None, :]) @ self.unitary.conj().T

    def scalar_labels(self):
        return [CSLabel(l, t) for l, t in zip(self.lambdas, self.thetas)]


def matrix_kernel(
    a: NormalMatrixLabel, b: NormalMatrixLabel, seq: FactorialSequence, trunc: Optional[SeriesTruncation] = None
) -> np.ndarray:
    """K(Z'*, Z) = sum_k Z'*^k Z^k / x_k! with Z' = a and Z = b.

    Z'*^k Z^k = U' diag(conj(z')^k) W diag(z^k) U* with W = U'* U, so the
    entries reduce to scalar series in conj(z'_i) z_j.
    """
    if a.M != b.M:
        raise DimensionMismatch(f"labels have dimensions {a.M} and {b.M}")
    w = np.conj(a.diag)[:, None] * b.diag[None, :]
    S = seqcore.complex_series(seq, w.ravel(), trunc).reshape(w.shape)
    W = a.unitary.conj().T @ b.unitary
    return a.unitary @ (W * S) @ b.unitary.conj().T


# ---------------------------------------------------------------------------
# vector coherent states
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class VectorCoherentState:
    """coeffs[j, k]: component j of C^M at level k."""

    coeffs: np.ndarray
    channel: int
    label: NormalMatrixLabel

    def norm(self) -> float:
        return float(np.sum(np.abs(self.coeffs) ** 2))


def _channel_weights(M: int, weights) -> np.ndarray:
    if weights is None:
        return np.full(M, 1.0 / M)
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (M,):
        raise DimensionMismatch(f"need {M} weights")
    if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-14:
        raise ValueError("weights must be nonnegative and sum to 1")
    return w


def _scalar_amplitudes(label: NormalMatrixLabel, seq, trunc) -> np.ndarray:
    """Row j holds the scalar coherent-state coefficients for z_j."""
    return np.stack([cs_nonlinear(seq, lab, trunc).coeffs for lab in label.scalar_labels()])


def vcs_build(
    label: NormalMatrixLabel,
    channel: int,
    seq: FactorialSequence,
    weights=None,
    trunc: Optional[SeriesTruncation] = None,
) -> VectorCoherentState:
    """|Z; i> with column k = N^{-1/2} Z^k chi^i / sqrt(x_k!).

    N = U diag(N(lambda_j) / mu_j) U* with mu_j = 1/M by default, so that
    the M channel states together carry unit norm.
    """
    M = label.M
    if not 1 <= channel <= M:
        raise IndexOutOfRange(f"channel {channel} outside 1..{M}")
    mu = _channel_weights(M, weights)
    amp = _scalar_amplitudes(label, seq, trunc) * np.sqrt(mu)[:, None]
    U = label.unitary
    # U* chi^i is the conjugated i-th row of U
    inner = amp * np.conj(U[channel - 1, :])[:, None]
    coeffs = U @ inner
    coeffs.setflags(write=False)
    return VectorCoherentState(coeffs, channel, label)


def vcs_all(label: NormalMatrixLabel, seq: FactorialSequence, weights=None, trunc=None):
    return [vcs_build(label, i, seq, weights, trunc) for i in range(1, label.M + 1)]


def vcs_total_norm(label: NormalMatrixLabel, seq: FactorialSequence, weights=None, trunc=None) -> float:
    """sum_i <Z; i | Z; i>."""
    return float(sum(s.norm() for s in vcs_all(label, seq, weights, trunc)))


# ---------------------------------------------------------------------------
# mixtures and partial traces
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MixtureDistribution:
    lambdas: np.ndarray
    family: DiscreteFamily
    weights: Optional[np.ndarray] = None

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=np.float64).ravel()
        a, b = self.family.interval
        if np.any(lam < a) or np.any(lam > b) or (not math.isfinite(b) and np.any(~np.isfinite(lam))):
            raise OutOfDomain(f"lambda_i must lie in [{a}, {b}]")
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "weights", _channel_weights(lam.size, self.weights))


def mixture_pmf(mix: MixtureDistribution, n: int) -> float:
    """sum_i w_i P(n, lambda_i)."""
    mix.family._check_n(n)
    p = np.exp(mix.family.log_pmf(n, mix.lambdas))
    return float(np.dot(mix.weights, p))


def partial_trace_prob(
    label: NormalMatrixLabel, n: int, seq: FactorialSequence, weights=None, trunc=None
) -> np.ndarray:
    """Tr_levels sum_i |Z; i><Z; i| (I x P_n), assembled from the channel states."""
    states = vcs_all(label, seq, weights, trunc)
    if not 0 <= n < states[0].coeffs.shape[1]:
        raise IndexOutOfRange(f"n={n} outside 0..{states[0].coeffs.shape[1] - 1}")
    cols = np.stack([s.coeffs[:, n] for s in states], axis=1)
    return cols @ cols.conj().T


def partial_trace_closed(label: NormalMatrixLabel, n: int, seq: FactorialSequence, weights=None) -> np.ndarray:
    """U diag(mu_i P(n, lambda_i)) U*."""
    mu = _channel_weights(label.M, weights)
    amp = _scalar_amplitudes(label, seq, None)
    if not 0 <= n < amp.shape[1]:
        raise IndexOutOfRange(f"n={n} outside 0..{amp.shape[1] - 1}")
    p = np.abs(amp[:, n]) ** 2 * mu
    U = label.unitary
    return (U * p[None, :]) @ U.conj().T


# ---------------------------------------------------------------------------
# matrix orthogonality by Monte Carlo over U(M)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MCResult:
    estimate: np.ndarray
    se: np.ndarray
    exact: np.ndarray
    samples: int

    @property
    def max_se(self) -> float:
        return float(np.max(self.se))

    def within(self, k: float = 3.0, floor: float = 1e-12) -> bool:
        """Every entry within max(k * SE, floor) of the exact value."""
        dev = np.abs(self.estimate - self.exact)
        return bool(np.all(dev <= np.maximum(k * self.se, floor)))


def radial_moment(m: int, n: int, seq: FactorialSequence, measure) -> float:
    """2 pi int lambda^{(m+n)/2} d(rho-bar) / sqrt(x_m! x_n!)."""
    if m == n:
        # integer moment: nodes of the measure's own rule are exact
        x, w = measure.rule(64)
        val = float(np.sum(w * x**m))
    else:
        val = measure.moment(0.5 * (m + n))
    return 2.0 * math.pi * val * math.exp(-0.5 * (seq.log_factorials[m] + seq.log_factorials[n]))


def _mc_block(seed_seq, size, M, m, n, radial, angular):
    rng = np.random.default_rng(seed_seq)
    U = haar_unitaries(M, size, rng)
    if angular == "exact":
        phase = np.full((size, M), 1.0 + 0j if m == n else 0.0 + 0j)
    else:
        theta = rng.uniform(0.0, 2.0 * math.pi, (size, M))
        phase = np.exp(-1j * (m - n) * theta)
    X = kernels.batch_conjugate(np.ascontiguousarray(U), np.ascontiguousarray(radial * phase))
    return X.sum(axis=0), (np.abs(X) ** 2).sum(axis=0)


def matrix_orthogonality_mc(
    m: int,
    n: int,
    seq: FactorialSequence,
    measure,
    M: int,
    samples: int,
    seed=0,
    *,
    angular: str = "sample",
    workers: int = 1,
) -> MCResult:
    """Estimate int Z^m Z*^n / sqrt(x_m! x_n!) d(Omega) = I delta_mn.

    U is Haar-sampled; the radial integral over each lambda_i is exact; the
    angles theta_i are sampled uniformly (``angular="sample"``) or
    integrated exactly (``angular="exact"``). Samples are split into fixed
    blocks, each with its own child seed, so the estimate does not depend on
    ``workers``.
    """
    if samples < 2:
        raise ValueError("need at least two samples")
    if angular not in ("sample", "exact"):
        raise ValueError("angular must be 'sample' or 'exact'")
    radial = radial_moment(m, n, seq, measure)
    sizes = [MC_BLOCK] * (samples // MC_BLOCK)
    if samples % MC_BLOCK:
        sizes.append(samples % MC_BLOCK)
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    args = [(c, s, M, m, n, radial, angular) for c, s in zip(children, sizes)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda a: _mc_block(*a), args))
    else:
        parts = [_mc_block(*a) for a in args]
    total = np.zeros((M, M), dtype=np.complex128)
    total_sq = np.zeros((M, M))
    for s1, s2 in parts:  # fixed reduction order
        total += s1
        total_sq += s2
    mean = total / samples
    var = np.clip(total_sq / samples - np.abs(mean) ** 2, 0.0, None) * samples / (samples - 1)
    se = np.sqrt(var / samples)
    exact = np.eye(M) if m == n else np.zeros((M, M))
    return MCResult(mean, se, exact, samples)


# ---------------------------------------------------------------------------
# tensor-product coherent states
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TensorCSLabel:
    labels: tuple

    def __post_init__(self):
        labs = tuple(self.labels)
        if not labs:
            raise ValueError("need at least one component label")
        object.__setattr__(self, "labels", labs)

    @classmethod
    def from_params(cls, lambdas: Sequence[float], thetas: Optional[Sequence[float]] = None):
        thetas = [0.0] * len(lambdas) if thetas is None else thetas
        if len(thetas) != len(lambdas):
            raise DimensionMismatch("lambdas and thetas differ in length")
        return cls(tuple(CSLabel(l, t) for l, t in zip(lambdas, thetas)))

    @property
    def M(self) -> int:
        return len(self.labels)


@dataclass(frozen=True, eq=False)
class TensorCoherentState:
    """|z_1>|z_2>...|z_M> kept as its list of factors."""

    factors: tuple

    @property
    def M(self) -> int:
        return len(self.factors)

    @property
    def shape(self):
        return tuple(len(f) for f in self.factors)

    def entry(self, ns) -> complex:
        if len(ns) != self.M:
            raise DimensionMismatch(f"need {self.M} indices")
        out = 1.0 + 0j
        for f, n in zip(self.factors, ns):
            if not 0 <= n < len(f):
                raise IndexOutOfRange(f"index {n} outside 0..{len(f) - 1}")
            out *= complex(f.coeffs[n])
        return out

    def norm(self) -> float:
        return float(np.prod([f.norm() for f in self.factors]))

    def materialize(self, n_max: Optional[int] = None) -> np.ndarray:
        """Dense coefficient array over levels 0..n_max in each slot."""
        if self.M > TENSOR_MAX_M:
            raise SizeLimit(f"cannot materialize M={self.M} > {TENSOR_MAX_M} factors")
        width = min(self.shape) - 1 if n_max is None else n_max
        if width > TENSOR_MAX_NMAX:
            raise SizeLimit(f"cannot materialize n_max={width} > {TENSOR_MAX_NMAX}")
        if any(width >= len(f) for f in self.factors):
            raise IndexOutOfRange("n_max exceeds a factor's length")
        out = np.ones((), dtype=np.complex128)
        for f in self.factors:
            out = np.multiply.outer(out, f.coeffs[: width + 1])
        return out


def tensor_cs(labels: TensorCSLabel, seq: FactorialSequence, trunc=None) -> TensorCoherentState:
    return TensorCoherentState(tuple(cs_nonlinear(seq, lab, trunc) for lab in labels.labels))


def joint_prob(labels: TensorCSLabel, ns, seq: FactorialSequence, trunc=None) -> float:
    """|<phi_{n_1..n_M}|z_1..z_M>|^2."""
    return float(abs(tensor_cs(labels, seq, trunc).entry(tuple(ns))) ** 2)


def marginal_probs(state: TensorCoherentState, ns) -> list:
    return [float(abs(f.coeffs[n]) ** 2) for f, n in zip(state.factors, ns)]


__all__ = [
    "CoherentState",
    "MCResult",
    "MixtureDistribution",
    "NormalMatrixLabel",
    "TensorCSLabel",
    "TensorCoherentState",
    "VectorCoherentState",
    "haar_unitaries",
    "haar_unitary",
    "joint_prob",
    "marginal_probs",
    "matrix_kernel",
    "matrix_orthogonality_mc",
    "mixture_pmf",
    "partial_trace_closed",
    "partial_trace_prob",
    "radial_moment",
    "tensor_cs",
    "vcs_all",
    "vcs_build",
    "vcs_total_norm",
]
