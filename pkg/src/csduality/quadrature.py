"""Gauss rules on bounded, semi-infinite and rationally mapped domains."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.special import roots_laguerre

from .errors import DivergentIntegral, InvalidInterval


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes and positive weights with ``sum(w * f(x))`` approximating an integral.

    ``domain`` is one of ``"bounded"``, ``"laguerre"`` (weight e^{-x} folded
    out), ``"laguerre-folded"`` (plain integral over [0, inf)) or ``"mapped"``
    (x = t / (1 - t) onto Gauss-Legendre).
    """

    nodes: np.ndarray
    weights: np.ndarray
    domain: str
    degree: int

    def integrate(self, f) -> float:
        return float(np.sum(self.weights * f(self.nodes)))

    def __len__(self):
        return self.nodes.shape[0]


@lru_cache(maxsize=64)
def _legendre(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@lru_cache(maxsize=64)
def _laguerre(n: int):
    x, w = roots_laguerre(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(a: float, b: float, n: int) -> QuadratureRule:
    """n-point rule on [a, b], exact for polynomials of degree <= 2n - 1."""
    if not (math.isfinite(a) and math.isfinite(b)) or not a < b:
        raise InvalidInterval(f"need finite a < b, got [{a}, {b}]")
    if n < 1:
        raise InvalidInterval("need at least one node")
    x, w = _legendre(n)
    half = 0.5 * (b - a)
    return QuadratureRule(half * x + 0.5 * (a + b), half * w, "bounded", 2 * n - 1)


def gauss_laguerre(n: int, folded: bool = False) -> QuadratureRule:
    """Rule for int_0^inf f(x) e^{-x} dx.

    With ``folded=True`` the weights absorb e^{x} so the rule approximates a
    plain int_0^inf f(x) dx; it is then exact for f = poly * e^{-x}.
    """
    if n < 1:
        raise InvalidInterval("need at least one node")
    x, w = _laguerre(n)
    if folded:
        return QuadratureRule(x, w * np.exp(x), "laguerre-folded", 2 * n - 1)
    return QuadratureRule(x, w.copy(), "laguerre", 2 * n - 1)


def mapped_legendre(n: int) -> QuadratureRule:
    """Plain int_0^inf f(x) dx through x = t / (1 - t), t in [0, 1)."""
    x, w = _legendre(n)
    t = 0.5 * (x + 1.0)
    wt = 0.5 * w
    return QuadratureRule(t / (1.0 - t), wt / (1.0 - t) ** 2, "mapped", 2 * n - 1)


def radial_rule(support, n: int, hint: str = "auto") -> QuadratureRule:
    """Pick a rule for a plain integral over ``support`` = (a, b).

    ``hint`` is ``"laguerre"`` when the integrand carries an e^{-x} factor,
    ``"mapped"`` for algebraic decay, ``"legendre"`` for bounded supports.
    """
    a, b = float(support[0]), float(support[1])
    if math.isfinite(b):
        return gauss_legendre(a, b, n)
    if a != 0.0:
        raise InvalidInterval("semi-infinite supports must start at 0")
    if hint == "laguerre":
        return gauss_laguerre(n, folded=True)
    return mapped_legendre(n)


def trapezoid_angles(n: int):
    """Equispaced nodes on [0, 2pi) with weights 2pi/n (exact for |freq| < n)."""
    theta = 2.0 * math.pi * np.arange(n) / n
    return theta, np.full(n, 2.0 * math.pi / n)


def adaptive(f, a: float, b: float, rel_tol: float = 1e-9, split=None) -> float:
    """Adaptive Gauss-Kronrod integral of a scalar function over [a, b].

    ``split`` optionally names interior points (e.g. a peak) at which the
    range is cut first. Raises DivergentIntegral when QUADPACK does not
    reach the tolerance.
    """
    cuts = [a]
    for p in sorted(split or []):
        if a < p < b and math.isfinite(p):
            cuts.append(p)
    cuts.append(b)
    total = 0.0
    err = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            try:
                val, e = integrate.quad(f, lo, hi, epsabs=0.0, epsrel=rel_tol * 0.1, limit=400)
            except integrate.IntegrationWarning as exc:
                raise DivergentIntegral(str(exc).splitlines()[0]) from exc
            total += val
            err += e
    if not math.isfinite(total) or err > max(rel_tol * abs(total), 1e-300):
        raise DivergentIntegral(f"integral did not converge (value {total}, error {err})")
    return total
