"""Empirical distribution distances: histogram TV, KS statistics, quantile W2."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import kolmogi, kolmogorov

from .quadrature import QuadratureDensity

Array = np.ndarray


def default_bins(n_samples: int) -> int:
    return max(int(math.ceil(n_samples ** (1.0 / 3.0))), 2)


def tv_hist(samples: Array, truth: QuadratureDensity, bins: Optional[int] = None) -> float:
    """0.5 * sum |p_hat - p| over a histogram aligned with the truth's grid.

    The histogram estimator is biased low for smooth deviations at small
    bin counts; bins defaults to ceil(n^(1/3)) per axis.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim == 1:
        samples = samples[:, None]
    n, d = samples.shape
    if n == 0:
        raise ValueError("samples must be nonempty")
    if d != truth.dim:
        raise ValueError(f"samples have dim {d}, truth has dim {truth.dim}")
    if d > 2:
        raise ValueError("tv_hist supports d <= 2")
    b = bins or default_bins(n)
    if d == 1:
        ax = truth.axes[0]
        edges = np.linspace(ax[0], ax[-1], b + 1)
        p = truth.bin_probs(edges)
        counts, _ = np.histogram(samples[:, 0], bins=edges)
        p_hat = counts / n
        outside = 1.0 - counts.sum() / n
        return 0.5 * (float(np.sum(np.abs(p_hat - p))) + outside + (1.0 - p.sum()))
    ex = np.linspace(truth.axes[0][0], truth.axes[0][-1], b + 1)
    ey = np.linspace(truth.axes[1][0], truth.axes[1][-1], b + 1)
    p = truth.bin_probs_2d(ex, ey)
    counts, _, _ = np.histogram2d(samples[:, 0], samples[:, 1], bins=(ex, ey))
    p_hat = counts / n
    outside = 1.0 - counts.sum() / n
    return 0.5 * (float(np.sum(np.abs(p_hat - p))) + outside + (1.0 - p.sum()))


def tv_noise_floor(
    truth: QuadratureDensity, n: int, bins: int, reps: int = 20, seed: int = 0
) -> tuple:
    """Simulated (mean, std) of tv_hist on samples drawn from the truth itself."""
    rng = np.random.default_rng(seed)
    vals = [tv_hist(truth.sample(rng, n), truth, bins) for _ in range(reps)]
    return float(np.mean(vals)), float(np.std(vals))


def ks_1samp(samples: Array, truth: QuadratureDensity) -> float:
    """One-sample KS statistic against the truth's CDF (1D)."""
    s = np.sort(np.asarray(samples, dtype=float).ravel())
    n = s.size
    cdf = truth.cdf_at(s)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - cdf), np.max(cdf - (i - 1) / n)))


def ks_1samp_cdf(samples: Array, cdf_fn) -> float:
    """One-sample KS statistic against an analytic CDF callable."""
    s = np.sort(np.asarray(samples, dtype=float).ravel())
    n = s.size
    cdf = np.asarray(cdf_fn(s), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - cdf), np.max(cdf - (i - 1) / n)))


def ks_2samp(a: Array, b: Array) -> float:
    """Two-sample KS statistic (max ECDF gap over the pooled sample)."""
    a = np.sort(np.asarray(a, dtype=float).ravel())
    b = np.sort(np.asarray(b, dtype=float).ravel())
    pooled = np.concatenate([a, b])
    ca = np.searchsorted(a, pooled, side="right") / a.size
    cb = np.searchsorted(b, pooled, side="right") / b.size
    return float(np.max(np.abs(ca - cb)))


def ks_pvalue(stat: float, n_eff: float) -> float:
    """Asymptotic p-value of a KS statistic with effective sample size n_eff."""
    return float(kolmogorov(math.sqrt(n_eff) * stat))


def ks_critical(level: float, n_eff: float) -> float:
    """Asymptotic critical value at the given significance level."""
    return float(kolmogi(level)) / math.sqrt(n_eff)


def two_sample_n_eff(n1: int, n2: int) -> float:
    return n1 * n2 / (n1 + n2)


def w2_quantile(samples: Array, truth: QuadratureDensity) -> float:
    """Wasserstein-2 distance to the truth via the 1D quantile coupling."""
    s = np.sort(np.asarray(samples, dtype=float).ravel())
    n = s.size
    u = (np.arange(n) + 0.5) / n
    q = truth.quantile(u)
    return float(np.sqrt(np.mean((s - q) ** 2)))


def w2_quantile_2samp(a: Array, b: Array) -> float:
    """Two-sample quantile-coupling W2 (requires equal sizes)."""
    a = np.sort(np.asarray(a, dtype=float).ravel())
    b = np.sort(np.asarray(b, dtype=float).ravel())
    if a.size != b.size:
        raise ValueError("two-sample W2 needs equal sizes")
    return float(np.sqrt(np.mean((a - b) ** 2)))


@dataclass(frozen=True)
class DistanceReport:
    tv: float
    ks: Optional[float]
    w2: Optional[float]
    n_samples: int
    bins: int

    def to_dict(self) -> dict:
        return {
            "tv": self.tv,
            "ks": self.ks,
            "w2": self.w2,
            "n_samples": self.n_samples,
            "bins": self.bins,
        }


def distance_report(
    samples: Array, truth: QuadratureDensity, bins: Optional[int] = None
) -> DistanceReport:
    """TV always; KS and W2 in 1D only."""
    samples = np.asarray(samples, dtype=float)
    if samples.ndim == 1:
        samples = samples[:, None]
    b = bins or default_bins(samples.shape[0])
    tv = tv_hist(samples, truth, b)
    ks = w2 = None
    if truth.dim == 1:
        ks = ks_1samp(samples[:, 0], truth)
        w2 = w2_quantile(samples[:, 0], truth)
    return DistanceReport(tv=tv, ks=ks, w2=w2, n_samples=samples.shape[0], bins=b)
