"""Latent Gaussian copula correlation from mixed data.

Every observed column is modeled as a monotone transform of a latent
standard normal variable Z_j. Kendall's tau-b is invariant under those
transforms, and for jointly Gaussian latents sigma_jk = sin(pi * tau_jk / 2),
so the pairwise tau matrix pushed through the sine identity estimates the
latent correlation matrix without ever estimating the margins. The same
identity is applied uniformly to continuous, ordinal, and binary pairs.
"""

from __future__ import annotations

import logging

import numpy as np
from scipy import stats

from .data import MixedDataset
from .errors import DegenerateColumnError

logger = logging.getLogger(__name__)


def kendall_tau(x: np.ndarray, y: np.ndarray) -> float:
    """Tie-corrected Kendall tau-b of two equal-length vectors.

    tau_b = (C - D) / sqrt((n0 - t_x) * (n0 - t_y)) with n0 = n(n-1)/2 and
    t_x, t_y the tied-pair counts per margin, computed by the O(n log n)
    merge-sort algorithm. A constant column leaves tau undefined and is
    signalled as degenerate.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be equal-length vectors")
    if x.shape[0] < 2:
        raise ValueError("tau needs at least two observations")
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise DegenerateColumnError("constant column: tau undefined")
    tau = stats.kendalltau(x, y).statistic
    if not np.isfinite(tau):
        raise DegenerateColumnError("tau undefined for this pair")
    return float(tau)


def tau_to_latent_corr(tau: float) -> float:
    """Map tau to the latent Gaussian correlation via sin(pi * tau / 2)."""
    if not -1.0 <= tau <= 1.0:
        raise ValueError("tau must lie in [-1, 1]")
    return float(np.sin(0.5 * np.pi * tau))


def nearest_psd_correlation(
    m: np.ndarray, max_iterations: int = 200, tol: float = 1e-10
) -> np.ndarray:
    """Repair an indefinite candidate correlation matrix.

    Alternates eigenvalue clipping with re-normalization to a unit diagonal
    until the smallest eigenvalue clears -tol. Clipping to a small positive
    floor keeps the rescaling (a congruence transform, so inertia is
    preserved) from reintroducing negative eigenvalues.
    """
    a = np.array(m, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expected a square matrix")
    a = (a + a.T) / 2.0
    for _ in range(max_iterations):
        w = np.linalg.eigvalsh(a)
        if w[0] >= -tol:
            break
        w, v = np.linalg.eigh(a)
        w = np.clip(w, 1e-12, None)
        a = (v * w) @ v.T
        d = np.sqrt(np.diag(a))
        a = a / np.outer(d, d)
        a = (a + a.T) / 2.0
    else:
        logger.warning("PSD repair did not converge in %d iterations", max_iterations)
    a = np.clip(a, -1.0, 1.0)
    np.fill_diagonal(a, 1.0)
    return a


def estimate_latent_sigma(data: MixedDataset) -> np.ndarray:
    """Pairwise tau-b pushed through the sine identity, PSD-repaired.

    Returns a symmetric unit-diagonal matrix with smallest eigenvalue
    >= -1e-8 (repaired to >= 0 whenever the raw sine transform falls below
    that). A repair that moves any entry by more than 0.1 is logged as a
    warning, since it means the pairwise estimates were far from a joint
    correlation structure.
    """
    p = data.p
    raw = np.eye(p)
    for i in range(p):
        xi = data.columns[i].values
        for j in range(i + 1, p):
            try:
                tau = kendall_tau(xi, data.columns[j].values)
            except DegenerateColumnError as exc:
                raise DegenerateColumnError(
                    f"column {data.labels[i]!r} or {data.labels[j]!r} is constant"
                ) from exc
            raw[i, j] = raw[j, i] = tau_to_latent_corr(tau)
    if np.linalg.eigvalsh(raw)[0] >= -1e-8:
        return raw
    repaired = nearest_psd_correlation(raw)
    deviation = float(np.max(np.abs(repaired - raw)))
    if deviation > 0.1:
        logger.warning(
            "PSD repair moved an entry by %.3f (> 0.1); pairwise estimates are "
            "far from a joint correlation matrix",
            deviation,
        )
    return repaired


def normal_scores(data: MixedDataset) -> np.ndarray:
    """Rank-based normal scores, one column per variable.

    Each column is mapped through z = Phi^{-1}(r / (n + 1)) with mid-ranks
    for ties, then standardized to mean 0 and variance 1 (1/n convention),
    so a parentless regression of a score column has residual variance
    exactly 1 and log-likelihood contribution 0.
    """
    n, p = data.n, data.p
    if n < 2:
        raise ValueError("normal scores need at least two observations")
    z = np.empty((n, p), dtype=np.float64)
    for j, col in enumerate(data.columns):
        vals = col.values
        if np.all(vals == vals[0]):
            raise DegenerateColumnError(
                f"column {data.labels[j]!r} is constant: scores undefined"
            )
        ranks = stats.rankdata(vals, method="average")
        scores = stats.norm.ppf(ranks / (n + 1))
        scores = scores - scores.mean()
        scores /= np.sqrt(np.mean(scores**2))
        z[:, j] = scores
    return z
