"""Monte-Carlo contraction measurements.

For a map F and sampled pairs (x, y), the ratio d(Fx, Fy)/d(x, y) is
recorded together with the pair displacement min(d(x, Fx), d(y, Fy)).
Binned maxima expose how contraction strengthens with displacement, and a
least-squares fit of log(ratio) against displacement yields the measured
contraction exponent with a bootstrap confidence interval.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .spaces import Point


@dataclass
class LipschitzReport:
    """Sampled pair distances before/after a map and the fitted exponent."""

    n_pairs: int
    n_skipped: int
    max_ratio: float
    d_before: np.ndarray
    d_after: np.ndarray
    ratios: np.ndarray
    displacements: np.ndarray
    bin_edges: np.ndarray
    bin_max: np.ndarray
    bin_count: np.ndarray
    epsilon_hat: float
    ci_low: float
    ci_high: float
    bootstrap_samples: int

    def summary(self) -> dict:
        return {
            "n_pairs": self.n_pairs,
            "n_skipped": self.n_skipped,
            "max_ratio": self.max_ratio,
            "fitted_epsilon": self.epsilon_hat,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "bin_edges": [float(v) for v in self.bin_edges],
            "bin_max": [float(v) for v in self.bin_max],
            "bin_count": [int(v) for v in self.bin_count],
        }

    def csv_rows(self):
        """Rows (pair, d_before, d_after, ratio, displacement)."""
        for i in range(len(self.ratios)):
            yield (i, float(self.d_before[i]), float(self.d_after[i]),
                   float(self.ratios[i]), float(self.displacements[i]))

    def bins_nonincreasing(self, slack: float = 1e-9) -> bool:
        """Whether populated-bin maxima never increase with displacement."""
        vals = [float(v) for v, c in zip(self.bin_max, self.bin_count) if c > 0]
        return all(vals[i + 1] <= vals[i] + slack for i in range(len(vals) - 1))


def _fit_epsilon(displacements: np.ndarray, ratios: np.ndarray) -> float:
    mask = ratios > 0
    x = displacements[mask]
    y = np.log(ratios[mask])
    if len(x) < 2 or float(np.ptp(x)) == 0.0:
        return 0.0
    slope = np.polyfit(x, y, 1)[0]
    return float(-slope)


def estimate_lipschitz(map_fn: Callable[[Point], Point],
                       pair_sampler: Callable,
                       metric: Callable[[Point, Point], float],
                       n_pairs: int,
                       rng: np.random.Generator,
                       bins: int = 5,
                       resolution: float = 1e-9,
                       bootstrap: int = 200) -> LipschitzReport:
    """Sample pair ratios of `map_fn` and fit the contraction exponent.

    Pairs closer than `resolution` are skipped (and counted); the
    displacement of a pair is the smaller of its two point displacements,
    matching a local bound of the form exp(-eps * displacement).
    """
    d_before = []
    d_after = []
    ratios = []
    disps = []
    skipped = 0
    for _ in range(n_pairs):
        x, y = pair_sampler(rng)
        db = metric(x, y)
        if db < resolution:
            skipped += 1
            continue
        fx = map_fn(x)
        fy = map_fn(y)
        da = metric(fx, fy)
        ratios.append(da / db)
        d_before.append(db)
        d_after.append(da)
        disps.append(min(metric(x, fx), metric(y, fy)))

    d_before = np.asarray(d_before)
    d_after = np.asarray(d_after)
    ratios = np.asarray(ratios)
    disps = np.asarray(disps)

    if len(ratios) == 0:
        edges = np.linspace(0.0, 1.0, bins + 1)
        return LipschitzReport(0, skipped, math.nan, d_before, d_after, ratios,
                               disps, edges, np.full(bins, math.nan),
                               np.zeros(bins, dtype=int), 0.0, 0.0, 0.0, bootstrap)

    top = float(disps.max())
    edges = np.linspace(0.0, top if top > 0 else 1.0, bins + 1)
    idx = np.clip(np.searchsorted(edges, disps, side="right") - 1, 0, bins - 1)
    bin_max = np.full(bins, -math.inf)
    bin_count = np.zeros(bins, dtype=int)
    for b in range(bins):
        sel = idx == b
        bin_count[b] = int(sel.sum())
        if bin_count[b]:
            bin_max[b] = float(ratios[sel].max())

    eps_hat = _fit_epsilon(disps, ratios)
    if bootstrap > 0 and len(ratios) >= 2:
        fits = np.empty(bootstrap)
        for b in range(bootstrap):
            pick = rng.integers(0, len(ratios), size=len(ratios))
            fits[b] = _fit_epsilon(disps[pick], ratios[pick])
        ci_low, ci_high = np.percentile(fits, [2.5, 97.5])
    else:
        ci_low = ci_high = eps_hat

    return LipschitzReport(
        n_pairs=len(ratios),
        n_skipped=skipped,
        max_ratio=float(ratios.max()),
        d_before=d_before,
        d_after=d_after,
        ratios=ratios,
        displacements=disps,
        bin_edges=edges,
        bin_max=bin_max,
        bin_count=bin_count,
        epsilon_hat=eps_hat,
        ci_low=float(ci_low),
        ci_high=float(ci_high),
        bootstrap_samples=bootstrap,
    )
