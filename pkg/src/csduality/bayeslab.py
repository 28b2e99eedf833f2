"""Simulated experiments, grid posteriors and central credible intervals."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import cumulative_trapezoid, simpson

from .distfam import (
    DiscreteFamily,
    PriorMeasure,
    binomial_p_family,
    posterior_density,
    uniform_prior,
)
from .errors import OutOfRange

GRID_SIZE = 512
SCAN_SIZE = 4097
# the tabulated window keeps every point where the density exceeds this
# fraction of its maximum
WINDOW_CUTOFF = 1e-14
# stop zooming once the window fills a quarter of the pre-scan
MIN_WINDOW_CELLS = (SCAN_SIZE - 1) // 4


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    trials: int
    true_param: float
    seed: object = None
    family: Optional[DiscreteFamily] = None

    def __post_init__(self):
        if self.trials < 1:
            raise OutOfRange("need at least one trial")
        fam = self.family if self.family is not None else binomial_p_family(self.trials)
        a, b = fam.interval
        if not a <= self.true_param <= b:
            raise OutOfRange(f"true_param={self.true_param} outside [{a}, {b}]")
        object.__setattr__(self, "family", fam)


def simulate(config: ExperimentConfig) -> int:
    """One draw from the family at ``true_param`` by inverting its CDF."""
    rng = np.random.default_rng(config.seed)
    u = rng.random()
    pmf = config.family.pmf_table([config.true_param])[0]
    cdf = np.cumsum(pmf)
    k = int(np.searchsorted(cdf, u, side="right"))
    return min(k, config.family.n_count - 1)


def point_estimate(k_obs: int, N: int) -> float:
    """Frequency estimate k_obs / N."""
    if N < 1 or not 0 <= k_obs <= N:
        raise OutOfRange(f"need 0 <= k_obs <= N with N >= 1, got k_obs={k_obs}, N={N}")
    return k_obs / N


@dataclass(frozen=True, eq=False)
class PosteriorSummary:
    grid: np.ndarray
    density: np.ndarray
    cdf: np.ndarray
    point_estimate: float  # posterior mean
    mode: float
    credible_interval: tuple  # (lo, hi, mass)
    evidence: float
    grid_mass: float  # integral of the evidence-normalized density over the grid
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        lo, hi, mass = self.credible_interval
        return {
            **self.meta,
            "mean": self.point_estimate,
            "mode": self.mode,
            "interval": {"lo": lo, "hi": hi, "mass": mass},
            "evidence": self.evidence,
            "grid_mass": self.grid_mass,
            "grid": {"size": int(self.grid.size), "lo": float(self.grid[0]), "hi": float(self.grid[-1])},
        }


def _upper_bound(f, a: float) -> float:
    hi = a + 1.0
    peak = float(np.max(f(np.linspace(a, hi, 257))))
    for _ in range(200):
        xs = np.linspace(a, hi, 257)
        vals = f(xs)
        peak = max(peak, float(np.max(vals)))
        if vals[-1] < WINDOW_CUTOFF * peak and np.argmax(vals) < 200:
            return hi
        hi = a + 2.0 * (hi - a)
    raise OutOfRange("posterior does not decay on the support")


def _window(f, a: float, b: float):
    """Shrink [a, b] to where f is above WINDOW_CUTOFF of its maximum."""
    lo, hi = a, b
    for _ in range(12):
        xs = np.linspace(lo, hi, SCAN_SIZE)
        vals = f(xs)
        keep = np.flatnonzero(vals > WINDOW_CUTOFF * np.max(vals))
        i, j = max(int(keep[0]) - 1, 0), min(int(keep[-1]) + 1, SCAN_SIZE - 1)
        if j - i >= MIN_WINDOW_CELLS or (i == 0 and j == SCAN_SIZE - 1):
            return float(xs[i]), float(xs[j])
        lo, hi = float(xs[i]), float(xs[j])
    return lo, hi


def _quantile(grid, cdf, q: float) -> float:
    k = int(np.searchsorted(cdf, q, side="left"))
    if k <= 0:
        return float(grid[0])
    if k >= grid.size:
        return float(grid[-1])
    c0, c1 = cdf[k - 1], cdf[k]
    t = 0.0 if c1 == c0 else (q - c0) / (c1 - c0)
    return float(grid[k - 1] + t * (grid[k] - grid[k - 1]))


def _mode(grid, density) -> float:
    """Arg max of the table, refined by a parabola through the top three points."""
    k = int(np.argmax(density))
    if k == 0 or k == grid.size - 1:
        return float(grid[k])
    y0, y1, y2 = density[k - 1 : k + 2]
    denom = y0 - 2.0 * y1 + y2
    if denom >= 0:
        return float(grid[k])
    h = grid[1] - grid[0]
    return float(grid[k] + 0.5 * h * (y0 - y2) / denom)


def posterior_summary(
    family: DiscreteFamily,
    prior: Optional[PriorMeasure],
    k_obs: int,
    mass: float = 0.95,
    grid_size: int = GRID_SIZE,
) -> PosteriorSummary:
    """Tabulated posterior for one observation with a central credible interval.

    The table covers the window where the density is non-negligible, found
    by repeatedly zooming a fine pre-scan, so narrow posteriors are still
    resolved by the full grid.
    """
    if not 0.0 < mass < 1.0:
        raise OutOfRange(f"mass must lie in (0, 1), got {mass}")
    prior = prior or uniform_prior(family.interval if math.isfinite(family.interval[1]) else (0.0, math.inf))
    post = posterior_density(family, prior, k_obs)
    a, b = post.support

    def f(x):
        with np.errstate(all="ignore"):
            return np.nan_to_num(np.asarray(post(x), dtype=np.float64))

    if not math.isfinite(b):
        b = _upper_bound(f, a)
    lo, hi = _window(f, a, b)
    grid = np.linspace(lo, hi, grid_size)
    # already normalized by the quadrature evidence; the grid mass is only a
    # diagnostic for how much of the posterior the window captured
    density = f(grid)
    grid_mass = float(simpson(density, x=grid))
    cdf = cumulative_trapezoid(density, grid, initial=0.0)
    cdf /= cdf[-1]
    tail = 0.5 * (1.0 - mass)
    interval = (_quantile(grid, cdf, tail), _quantile(grid, cdf, 1.0 - tail), mass)
    mean = float(simpson(grid * density, x=grid) / grid_mass)
    mode = _mode(grid, density)
    meta = {"family": family.name, "prior": prior.name, "k_obs": int(k_obs)}
    return PosteriorSummary(grid, density, cdf, mean, mode, interval, post.evidence, grid_mass, meta)


def interval_mass(summary: PosteriorSummary) -> float:
    """CDF(hi) - CDF(lo) read back from the table."""
    lo, hi, _ = summary.credible_interval
    return float(np.interp(hi, summary.grid, summary.cdf) - np.interp(lo, summary.grid, summary.cdf))


def write_csv(summary: PosteriorSummary, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(["lambda", "density", "cdf"])
        for x, d, c in zip(summary.grid, summary.density, summary.cdf):
            w.writerow([format(float(x), ".17g"), format(float(d), ".17g"), format(float(c), ".17g")])
