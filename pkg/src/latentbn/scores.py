"""Decomposable Gaussian DAG scores on rank-transformed inputs.

Two interchangeable local scores drive the search phase:

* sem: ordinary least squares of a normal-score column on its parents'
  columns; the contribution is -(n/2) log(sigma_hat^2) with the residual
  variance under the 1/n convention.
* gauss: the same quantity expressed through the latent correlation matrix,
  -(n/2) log(1 - R^2), with R^2 the population regression coefficient of
  determination read off the matrix. No data pass is needed, only sigma.

Both accept a BIC penalty of (|parents| + 1)/2 * log n per node (weight
coefficients plus a variance) or no penalty at all, which preserves pure
likelihood comparisons such as score equivalence across a Markov class.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .errors import CollinearityError

VARIANCE_FLOOR = 1e-12
R2_CAP = 1.0 - 1e-12

Scorer = Callable[[int, tuple[int, ...]], float]


@dataclass(frozen=True)
class ScoreConfig:
    score_kind: str  # "sem" | "gauss"
    n: int | None = None
    penalty: str = "bic"

    def __post_init__(self) -> None:
        if self.score_kind not in ("sem", "gauss"):
            raise ValueError(f"unknown score kind {self.score_kind!r}")
        if self.penalty not in ("bic", "none"):
            raise ValueError(f"unknown penalty {self.penalty!r}")
        if self.n is not None and self.n < 2:
            raise ValueError("n must be at least 2")


class ScoreCache:
    """Memo of local scores keyed by (node, sorted parent tuple)."""

    def __init__(self) -> None:
        self._table: dict[tuple[int, tuple[int, ...]], float] = {}

    def get_or_compute(self, j: int, parents: Iterable[int], compute) -> float:
        key = (int(j), tuple(sorted(int(v) for v in parents)))
        if key not in self._table:
            self._table[key] = compute(key[0], key[1])
        return self._table[key]

    def __len__(self) -> int:
        return len(self._table)


def _require_n(cfg: ScoreConfig) -> int:
    if cfg.n is None:
        raise ValueError("ScoreConfig.n is required for scoring")
    return cfg.n


def _penalty(num_parents: int, cfg: ScoreConfig) -> float:
    if cfg.penalty == "none":
        return 0.0
    return (num_parents + 1) / 2.0 * np.log(_require_n(cfg))


def local_score_sem(
    z: np.ndarray, j: int, parents: Iterable[int], cfg: ScoreConfig
) -> float:
    """-(n/2) log(sigma_hat^2) for node j regressed on its parents.

    The columns of z are centered and scaled, so the regression carries no
    intercept; sigma_hat^2 = RSS/n is floored at 1e-12 to keep the score
    finite under near-interpolation. A rank-deficient parent design raises
    CollinearityError.
    """
    n = _require_n(cfg)
    if z.shape[0] != n:
        raise ValueError("cfg.n must match the score matrix rows")
    pa = tuple(sorted(int(v) for v in parents))
    y = z[:, j]
    if pa:
        x = z[:, pa]
        beta, _, rank, _ = np.linalg.lstsq(x, y, rcond=None)
        if rank < len(pa):
            raise CollinearityError(f"rank-deficient parents {pa} for node {j}")
        resid = y - x @ beta
        sigma2 = float(resid @ resid) / n
    else:
        sigma2 = float(y @ y) / n
    sigma2 = max(sigma2, VARIANCE_FLOOR)
    return float(-(n / 2.0) * np.log(sigma2) - _penalty(len(pa), cfg))


def local_score_gauss(
    sigma: np.ndarray, j: int, parents: Iterable[int], cfg: ScoreConfig
) -> float:
    """-(n/2) log(1 - R^2) with R^2 read off the latent correlation matrix.

    R^2 = sigma_{j,pa} Sigma_{pa,pa}^{-1} sigma_{pa,j}, clamped to
    [0, 1 - 1e-12]. A singular parent submatrix raises CollinearityError.
    """
    n = _require_n(cfg)
    pa = tuple(sorted(int(v) for v in parents))
    if pa:
        sub = sigma[np.ix_(pa, pa)]
        s = sigma[list(pa), j]
        try:
            sol = np.linalg.solve(sub, s)
        except np.linalg.LinAlgError as exc:
            raise CollinearityError(f"singular parent block {pa} for node {j}") from exc
        r2 = float(s @ sol)
        if not np.isfinite(r2):
            raise CollinearityError(f"singular parent block {pa} for node {j}")
        r2 = min(max(r2, 0.0), R2_CAP)
    else:
        r2 = 0.0
    return float(-(n / 2.0) * np.log(1.0 - r2) - _penalty(len(pa), cfg))


def sem_scorer(z: np.ndarray, cfg: ScoreConfig) -> Scorer:
    if cfg.score_kind != "sem":
        raise ValueError("config is not a sem score")
    return lambda j, parents: local_score_sem(z, j, parents, cfg)


def gauss_scorer(sigma: np.ndarray, cfg: ScoreConfig) -> Scorer:
    if cfg.score_kind != "gauss":
        raise ValueError("config is not a gauss score")
    return lambda j, parents: local_score_gauss(sigma, j, parents, cfg)


def total_score(graph, scorer: Scorer, cache: ScoreCache | None = None) -> float:
    """Sum of local scores over the DAG's parent sets."""
    if cache is None:
        cache = ScoreCache()
    return float(
        sum(
            cache.get_or_compute(j, graph.parents(j), scorer)
            for j in range(graph.node_count)
        )
    )
