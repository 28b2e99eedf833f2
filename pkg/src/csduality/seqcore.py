"""Generalized factorial sequences and the normalization series N(lambda).

A sequence x_1, x_2, ... of positive reals defines x_n! = x_1 x_2 ... x_n
(x_0! = 1) and the power series N(lambda) = sum_k lambda^k / x_k!. All
factorial-like quantities are kept in log space.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ._backend import kernels
from .errors import (
    IndexOutOfRange,
    NonPositiveTerm,
    OutOfDomain,
    TailNotConverged,
)

DEFAULT_TAIL_TOL = 1e-12


def default_nmax() -> int:
    """Truncation used for infinite sequences, overridable by ``CSDUALITY_NMAX``."""
    raw = os.environ.get("CSDUALITY_NMAX")
    if raw is None:
        return 256
    n = int(raw)
    if n < 1:
        raise ValueError("CSDUALITY_NMAX must be a positive integer")
    return n


@dataclass(frozen=True)
class SeriesTruncation:
    n_max: Optional[int] = None
    tail_tol: float = DEFAULT_TAIL_TOL

    def __post_init__(self):
        if self.n_max is not None and self.n_max < 0:
            raise ValueError("n_max must be >= 0")
        if not self.tail_tol > 0:
            raise ValueError("tail_tol must be > 0")


@dataclass(frozen=True)
class NormalizationValue:
    value: float
    log_value: float
    terms_used: int
    tail_bound: float = 0.0


@dataclass(frozen=True)
class RadiusEstimate:
    value: float
    estimated: bool


@dataclass(frozen=True, eq=False)
class FactorialSequence:
    """Positive sequence x_1..x_{n_max} with cached log factorials.

    ``infinite=True`` marks a truncation of an infinite sequence; sums over
    it then carry a tail estimate. ``limit`` is the known limit of x_n when
    the sequence comes from a closed form.
    """

    values: np.ndarray
    infinite: bool = False
    name: str = "explicit"
    params: dict = field(default_factory=dict)
    limit: Optional[float] = None
    log_factorials: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        vals = np.ascontiguousarray(self.values, dtype=np.float64).copy()
        if vals.ndim != 1:
            raise ValueError("sequence values must be one-dimensional")
        bad = np.flatnonzero(~(vals > 0))
        if bad.size:
            k = int(bad[0]) + 1
            raise NonPositiveTerm(f"x_{k} = {float(vals[k - 1])!r} is not positive")
        vals.setflags(write=False)
        logf = kernels.cumulative_log(vals)
        logf.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "log_factorials", logf)

    @property
    def n_max(self) -> int:
        return int(self.values.shape[0])

    def x(self, n: int) -> float:
        """x_n with the convention x_0 = 0."""
        if n == 0:
            return 0.0
        if not 1 <= n <= self.n_max:
            raise IndexOutOfRange(f"n={n} outside 0..{self.n_max}")
        return float(self.values[n - 1])

    def truncated(self, n_max: int) -> "FactorialSequence":
        if n_max > self.n_max:
            raise IndexOutOfRange(f"cannot extend sequence past n_max={self.n_max}")
        return FactorialSequence(
            self.values[:n_max],
            infinite=self.infinite,
            name=self.name,
            params=dict(self.params),
            limit=self.limit,
        )

    def __repr__(self):
        kind = "infinite" if self.infinite else "finite"
        return f"FactorialSequence(name={self.name!r}, n_max={self.n_max}, {kind})"


def from_function(
    fn: Callable[[np.ndarray], np.ndarray],
    n_max: int,
    *,
    infinite: bool = True,
    name: str = "function",
    params: Optional[dict] = None,
    limit: Optional[float] = None,
) -> FactorialSequence:
    n = np.arange(1, n_max + 1, dtype=np.float64)
    return FactorialSequence(
        np.asarray(fn(n), dtype=np.float64),
        infinite=infinite,
        name=name,
        params=params or {},
        limit=limit,
    )


def poisson_sequence(n_max: Optional[int] = None) -> FactorialSequence:
    """x_n = n, so x_n! = n! and N(lambda) = e^lambda."""
    n_max = default_nmax() if n_max is None else n_max
    return from_function(lambda n: n, n_max, name="poisson", limit=math.inf)


def su2_sequence(N: int) -> FactorialSequence:
    """x_n = n / (N - n + 1), n = 1..N, giving N(lambda) = (1 + lambda)^N."""
    if N < 0:
        raise ValueError("N must be >= 0")
    return from_function(
        lambda n: n / (N - n + 1), N, infinite=False, name="su2", params={"N": N}
    )


def su11_sequence(m: int, n_max: Optional[int] = None) -> FactorialSequence:
    """x_n = n / (m + n + 1), giving N(w) = (1 - w)^{-(m + 2)} on [0, 1)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    n_max = default_nmax() if n_max is None else n_max
    return from_function(
        lambda n: n / (m + n + 1), n_max, name="su11", params={"m": m}, limit=1.0
    )


def constant_sequence(c: float, n_max: Optional[int] = None) -> FactorialSequence:
    n_max = default_nmax() if n_max is None else n_max
    return from_function(
        lambda n: np.full_like(n, c), n_max, name="constant", params={"c": c}, limit=c
    )


def generalized_log_factorial(seq: FactorialSequence, n: int) -> float:
    """log(x_1 x_2 ... x_n); zero for n = 0."""
    if not 0 <= n <= seq.n_max:
        raise IndexOutOfRange(f"n={n} outside 0..{seq.n_max}")
    return float(seq.log_factorials[n])


def radius_of_convergence(seq: FactorialSequence) -> RadiusEstimate:
    """Radius L of sum lambda^k / x_k!, i.e. limsup x_n.

    Finite sequences give a polynomial, so L is infinite. For truncated
    infinite sequences without a known limit the last ten terms are
    inspected; if they have not settled (relative change above 1e-6) the
    returned value is an extrapolation and ``estimated`` is set.
    """
    if not seq.infinite:
        return RadiusEstimate(math.inf, False)
    if seq.limit is not None:
        return RadiusEstimate(float(seq.limit), False)
    tail = seq.values[-10:]
    top = float(np.max(tail))
    spread = float(np.max(tail) - np.min(tail))
    if spread <= 1e-6 * top:
        return RadiusEstimate(top, False)
    if tail.size < 3:
        return RadiusEstimate(top, True)
    steps = np.diff(tail)
    if not (np.all(steps > 0) or np.all(steps < 0)):
        return RadiusEstimate(top, True)
    # fit |step_n| ~ n^{-p}; the increments sum to a finite limit only for p > 1
    n_last = seq.n_max
    n_first = n_last - steps.size + 1
    p = math.log(abs(steps[0]) / abs(steps[-1])) / math.log(n_last / n_first)
    if p <= 1.25:
        return RadiusEstimate(math.inf, True)
    if steps[-1] < 0:
        return RadiusEstimate(top, True)
    # remaining increments: sum_{k > n} c k^{-p} ~ n |step_n| / (p - 1)
    est = float(tail[-1]) + n_last * float(steps[-1]) / (p - 1.0)
    return RadiusEstimate(est, True)


def log_terms(seq: FactorialSequence, lam, n_terms: Optional[int] = None) -> np.ndarray:
    """Matrix of log(lambda^k / x_k!) with rows over lambda, columns k = 0..n_terms-1."""
    lam = np.atleast_1d(np.asarray(lam, dtype=np.float64))
    n_terms = seq.n_max + 1 if n_terms is None else n_terms
    k = np.arange(n_terms, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        loglam = np.log(lam)[:, None]
        t = k[None, :] * loglam
    t[:, 0] = 0.0
    t[np.isnan(t)] = -np.inf
    return np.ascontiguousarray(t - seq.log_factorials[None, :n_terms])


def _tail_bound(seq: FactorialSequence, lam: np.ndarray, log_last: np.ndarray, log_sum: np.ndarray):
    """Relative tail bound from a geometric majorant with ratio lambda / x_{n_max}."""
    if not seq.infinite:
        return np.zeros_like(lam)
    if seq.n_max == 0:
        # nothing to bound the tail with
        return np.where(lam == 0, 0.0, np.inf)
    ratio = lam / seq.values[-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.exp(log_last - log_sum) * ratio / (1.0 - ratio)
    rel = np.where(lam == 0, 0.0, rel)
    return np.where(ratio >= 1.0, np.inf, rel)


def _check_domain(seq: FactorialSequence, lam: np.ndarray):
    if np.any(lam < 0) or np.any(~np.isfinite(lam)):
        raise OutOfDomain("lambda must be finite and >= 0")
    L = radius_of_convergence(seq).value
    if np.any(lam >= L):
        raise OutOfDomain(f"lambda must be < L = {L}")


def log_normalization_array(
    seq: FactorialSequence, lam, trunc: Optional[SeriesTruncation] = None
) -> np.ndarray:
    """Vectorized log N(lambda); raises when the tail bound is not met."""
    trunc = trunc or SeriesTruncation()
    lam = np.atleast_1d(np.asarray(lam, dtype=np.float64))
    _check_domain(seq, lam)
    n_terms = seq.n_max + 1
    if trunc.n_max is not None:
        n_terms = min(n_terms, trunc.n_max + 1)
    work = seq if n_terms == seq.n_max + 1 else seq.truncated(n_terms - 1)
    t = log_terms(work, lam)
    log_sum = kernels.log_series_rows(t)
    rel = _tail_bound(work, lam, t[:, -1], log_sum)
    worst = float(np.max(rel)) if rel.size else 0.0
    if worst > trunc.tail_tol:
        raise TailNotConverged(
            f"tail bound {worst:.3g} exceeds {trunc.tail_tol:.3g} at n_max={n_terms - 1}"
        )
    return log_sum


def normalization(
    seq: FactorialSequence, lam: float, trunc: Optional[SeriesTruncation] = None
) -> NormalizationValue:
    """N(lambda) = sum_k lambda^k / x_k!, summed in log space."""
    trunc = trunc or SeriesTruncation()
    lam_arr = np.array([float(lam)])
    _check_domain(seq, lam_arr)
    n_terms = seq.n_max + 1 if trunc.n_max is None else min(seq.n_max, trunc.n_max) + 1
    work = seq if n_terms == seq.n_max + 1 else seq.truncated(n_terms - 1)
    t = log_terms(work, lam_arr)
    log_sum = kernels.log_series_rows(t)
    rel = float(_tail_bound(work, lam_arr, t[:, -1], log_sum)[0])
    if rel > trunc.tail_tol:
        raise TailNotConverged(
            f"tail bound {rel:.3g} exceeds {trunc.tail_tol:.3g} at n_max={n_terms - 1}"
        )
    lv = float(log_sum[0])
    return NormalizationValue(math.exp(lv), lv, n_terms, rel)


def complex_series(seq: FactorialSequence, w, trunc: Optional[SeriesTruncation] = None):
    """sum_k w^k / x_k! for complex w with |w| < L (vectorized).

    The rounding error is relative to the modulus series sum |w|^k / x_k!,
    so sums that cancel heavily (large |w| with arg w near pi) lose
    relative accuracy.
    """
    trunc = trunc or SeriesTruncation()
    w = np.atleast_1d(np.asarray(w, dtype=np.complex128))
    mag = np.abs(w)
    _check_domain(seq, mag)
    n_terms = seq.n_max + 1 if trunc.n_max is None else min(seq.n_max, trunc.n_max) + 1
    work = seq if n_terms == seq.n_max + 1 else seq.truncated(n_terms - 1)
    t = log_terms(work, mag)
    k = np.arange(n_terms, dtype=np.float64)
    phase = np.ascontiguousarray(k[None, :] * np.angle(w)[:, None])
    total = kernels.complex_series_rows(t, phase)
    # |sum| can cancel; bound the tail against the modulus series instead
    log_abs = kernels.log_series_rows(t)
    rel = _tail_bound(work, mag, t[:, -1], log_abs)
    worst = float(np.max(rel)) if rel.size else 0.0
    if worst > trunc.tail_tol:
        raise TailNotConverged(f"tail bound {worst:.3g} exceeds {trunc.tail_tol:.3g}")
    return total
