"""Evaluation statistics: IQM, stratified bootstrap intervals, PCA, k-means."""

from __future__ import annotations

import numpy as np
from scipy.cluster.vq import kmeans2


def iqm(values) -> float:
    """Interquartile mean: drop the lowest and highest quarter, average the rest.

    With n values, floor(n/4) are trimmed from each side.
    """
    arr = np.sort(np.asarray(values, dtype=np.float64).ravel())
    if arr.size == 0:
        raise ValueError("iqm of empty input")
    trim = arr.size // 4
    return float(arr[trim: arr.size - trim].mean())


def stratified_bootstrap_ci(per_seed_curves, n_resamples: int = 100_000,
                            level: float = 0.95, seed: int = 0):
    """Percentile bootstrap interval of the across-seed IQM, per timepoint.

    `per_seed_curves` is (seeds, timepoints): seeds are resampled with
    replacement (the stratification unit), the IQM recomputed per resample,
    and the (1-level)/2 percentiles taken. Returns (lo, hi) arrays of length
    timepoints.
    """
    curves = np.atleast_2d(np.asarray(per_seed_curves, dtype=np.float64))
    n_seeds, n_points = curves.shape
    if n_seeds == 0 or n_points == 0:
        raise ValueError("bootstrap needs at least one seed curve")
    if n_seeds == 1:
        return curves[0].copy(), curves[0].copy()
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, n_seeds, size=(n_resamples, n_seeds))
    trim = n_seeds // 4
    lo_q = 100.0 * (1.0 - level) / 2.0
    hi_q = 100.0 - lo_q
    lo = np.empty(n_points)
    hi = np.empty(n_points)
    for t in range(n_points):
        resampled = curves[idx, t]          # (n_resamples, n_seeds)
        resampled.sort(axis=1)
        stat = resampled[:, trim: n_seeds - trim].mean(axis=1)
        lo[t], hi[t] = np.percentile(stat, [lo_q, hi_q])
    return lo, hi


def pca_project(rows, out_dims: int = 2):
    """Mean-centered projection onto the top principal components.

    Returns (projected (n, out_dims), eigenvalues (all, descending),
    components (out_dims, dims)). Component signs are fixed so the largest
    absolute entry of each is positive.
    """
    x = np.asarray(rows, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < out_dims:
        raise ValueError(f"need at least {out_dims} rows of equal dimension")
    centered = x - x.mean(axis=0)
    cov = centered.T @ centered / max(x.shape[0] - 1, 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals = eigvals[order]
    components = eigvecs[:, order].T[:out_dims]
    for row in components:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0
    return centered @ components.T, eigvals, components


def kmeans_task_purity(features, labels, k: int = 2, seed: int = 0) -> float:
    """Cluster rows into k groups and score agreement with the true labels.

    Purity: each cluster votes for its majority label; the fraction of rows
    matching their cluster's vote.
    """
    x = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels)
    _, assignments = kmeans2(x, k, minit="++", seed=seed)
    matched = 0
    for cluster in range(k):
        members = labels[assignments == cluster]
        if members.size:
            _, counts = np.unique(members, return_counts=True)
            matched += counts.max()
    return matched / len(labels)
