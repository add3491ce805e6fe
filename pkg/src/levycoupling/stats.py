"""Two-sample statistics used by the Monte-Carlo verification scenarios."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist


def _as2d(a):
    a = np.asarray(a, dtype=float)
    return a[:, None] if a.ndim == 1 else a


def energy_distance(a, b):
    """V-statistic energy distance 2 E|A-B| - E|A-A'| - E|B-B'|."""
    a, b = _as2d(a), _as2d(b)
    dab = cdist(a, b).mean()
    daa = cdist(a, a).mean()
    dbb = cdist(b, b).mean()
    return 2.0 * dab - daa - dbb


@dataclass
class EnergyTestResult:
    stat: float
    threshold95: float
    pvalue: float
    n_used: int

    @property
    def passed(self):
        return self.stat <= self.threshold95


def energy_permutation_test(a, b, n_perm=200, seed=0, max_points=2048):
    """Permutation test of equality in law via the energy statistic.

    Large inputs are subsampled to ``max_points`` per group (the permutation
    null is computed on the same subsample, so the test stays valid).
    """
    rng = np.random.default_rng(seed)
    a, b = _as2d(a), _as2d(b)
    if len(a) > max_points:
        a = a[rng.choice(len(a), max_points, replace=False)]
    if len(b) > max_points:
        b = b[rng.choice(len(b), max_points, replace=False)]
    n, m = len(a), len(b)
    pool = np.concatenate([a, b], axis=0)
    D = cdist(pool, pool)

    def stat_for(idx_a, idx_b):
        dab = D[np.ix_(idx_a, idx_b)].mean()
        daa = D[np.ix_(idx_a, idx_a)].mean()
        dbb = D[np.ix_(idx_b, idx_b)].mean()
        return 2.0 * dab - daa - dbb

    obs = stat_for(np.arange(n), np.arange(n, n + m))
    perm_stats = np.empty(n_perm)
    for k in range(n_perm):
        p = rng.permutation(n + m)
        perm_stats[k] = stat_for(p[:n], p[n:])
    thresh = float(np.quantile(perm_stats, 0.95))
    pval = float((np.sum(perm_stats >= obs) + 1.0) / (n_perm + 1.0))
    return EnergyTestResult(stat=obs, threshold95=thresh, pvalue=pval, n_used=n + m)


def energy_permutation_test_grouped(groups_a, groups_b, n_perm=500, seed=0):
    """Permutation test where the exchangeable units are whole groups
    (e.g. independent paths each contributing several correlated samples)."""
    rng = np.random.default_rng(seed)
    groups = [_as2d(g) for g in groups_a] + [_as2d(g) for g in groups_b]
    na = len(groups_a)
    labels = np.zeros(len(groups), dtype=bool)
    labels[:na] = True

    def stat_for(lbl):
        a = np.concatenate([g for g, l in zip(groups, lbl) if l], axis=0)
        b = np.concatenate([g for g, l in zip(groups, lbl) if not l], axis=0)
        return energy_distance(a, b)

    obs = stat_for(labels)
    perm_stats = np.empty(n_perm)
    for k in range(n_perm):
        perm_stats[k] = stat_for(rng.permutation(labels))
    thresh = float(np.quantile(perm_stats, 0.95))
    pval = float((np.sum(perm_stats >= obs) + 1.0) / (n_perm + 1.0))
    return EnergyTestResult(stat=obs, threshold95=thresh, pvalue=pval,
                            n_used=sum(len(g) for g in groups))


def moment_zscores(a, b):
    """z-scores for the difference of first moments (per coordinate) and of
    the mean squared norm, under independent-sample normal approximation."""
    a, b = _as2d(a), _as2d(b)
    zs = []
    for f in [lambda s: s, lambda s: (s**2).sum(axis=1, keepdims=True)]:
        fa, fb = f(a), f(b)
        num = fa.mean(axis=0) - fb.mean(axis=0)
        se = np.sqrt(fa.var(axis=0, ddof=1) / len(fa) + fb.var(axis=0, ddof=1) / len(fb))
        zs.extend(np.abs(num) / np.maximum(se, 1e-300))
    return np.asarray(zs)


def sorted_w1(a, b):
    """Exact 1-d L1 Wasserstein distance between equal-size sample sets."""
    a = np.sort(np.asarray(a, dtype=float).ravel())
    b = np.sort(np.asarray(b, dtype=float).ravel())
    if len(a) != len(b):
        q = np.linspace(0.0, 1.0, 513)[1:-1]
        return float(np.mean(np.abs(np.quantile(a, q) - np.quantile(b, q))))
    return float(np.mean(np.abs(a - b)))


def binomial_band(successes, n, zscore=1.96):
    """Normal-approximation confidence band for a survival proportion."""
    p = successes / max(n, 1)
    half = zscore * np.sqrt(np.maximum(p * (1.0 - p), 0.0) / max(n, 1))
    return np.clip(p - half, 0.0, 1.0), np.clip(p + half, 0.0, 1.0)
