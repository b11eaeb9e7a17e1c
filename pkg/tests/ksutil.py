"""Kolmogorov-Smirnov helpers for weighted samples.

Weighted variants use the effective sample size (sum w)^2 / sum w^2 in the
critical value; this is the standard plug-in approximation for importance
samples, adequate at the 1e-3 acceptance level used here.
"""

import math

import numpy as np


def ks_critical(level: float, n_eff: float, m_eff: float | None = None) -> float:
    c = math.sqrt(-math.log(level / 2.0) / 2.0)
    if m_eff is None:
        return c / math.sqrt(n_eff)
    return c * math.sqrt((n_eff + m_eff) / (n_eff * m_eff))


def weighted_ecdf(values, weights):
    order = np.argsort(values)
    v = np.asarray(values)[order]
    w = np.asarray(weights, dtype=float)[order]
    cum = np.cumsum(w)
    return v, cum / cum[-1]


def weighted_ks_1samp(values, weights, cdf) -> tuple[float, float]:
    """(statistic, effective sample size) against a scalar-or-vectorized CDF."""
    v, ecdf = weighted_ecdf(values, weights)
    ref = np.asarray(cdf(v), dtype=float)
    lower = np.concatenate(([0.0], ecdf[:-1]))
    stat = float(np.max(np.maximum(np.abs(ecdf - ref), np.abs(lower - ref))))
    w = np.asarray(weights, dtype=float)
    n_eff = float(w.sum() ** 2 / np.dot(w, w))
    return stat, n_eff


def weighted_ks_2samp(values1, weights1, values2) -> tuple[float, float, float]:
    """Weighted sample vs unweighted sample: (statistic, n_eff, m)."""
    v1, e1 = weighted_ecdf(values1, weights1)
    v2 = np.sort(np.asarray(values2))
    grid = np.concatenate([v1, v2])
    steps = np.concatenate(([0.0], e1))
    f1 = steps[np.searchsorted(v1, grid, side="right")]
    f2 = np.searchsorted(v2, grid, side="right") / v2.size
    stat = float(np.max(np.abs(f1 - f2)))
    w = np.asarray(weights1, dtype=float)
    n_eff = float(w.sum() ** 2 / np.dot(w, w))
    return stat, n_eff, float(v2.size)
