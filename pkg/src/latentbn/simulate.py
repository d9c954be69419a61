"""Synthetic mixed-data generator.

A random weighted DAG over p variables (lower-triangular convention: an
edge j -> i exists only for j < i) drives a linear Gaussian structural
model; the first half of the columns is then collapsed to binary or
ordinal margins so the latent-correlation machinery has something to
recover.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular
from scipy.stats import binom, norm

from .data import Column, MixedDataset
from .graphs import Dag
from .rngs import STAGE_DAG, STAGE_LATENT, STAGE_MIX, rng_for

WEIGHT_LO, WEIGHT_HI = 0.1, 1.0
ORDINAL_TRIALS = 4  # Binomial(4, theta) margins give 5 ordinal levels


@dataclass(frozen=True)
class SimConfig:
    p: int
    n: int
    s: float
    seed: int = 0

    def __post_init__(self) -> None:
        if self.p < 2 or self.p % 2 != 0:
            raise ValueError("p must be an even integer >= 2")
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if not 0 <= self.s <= self.p - 1:
            raise ValueError("s must lie in [0, p - 1]")


@dataclass(frozen=True)
class WeightedDag:
    """Weighted adjacency with strictly lower-triangular support."""

    a: np.ndarray  # a[i, j] != 0 only for j < i and encodes the edge j -> i

    def __post_init__(self) -> None:
        a = np.array(self.a, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("adjacency must be square")
        if np.any(np.triu(a) != 0.0):
            raise ValueError("support must be strictly lower-triangular")
        w = np.abs(a[a != 0.0])
        if w.size and (w.min() < WEIGHT_LO or w.max() > WEIGHT_HI):
            raise ValueError(f"weight magnitudes must lie in [{WEIGHT_LO}, {WEIGHT_HI}]")
        object.__setattr__(self, "a", a)
        a.setflags(write=False)

    @property
    def p(self) -> int:
        return int(self.a.shape[0])

    def to_dag(self, node_labels: tuple[str, ...] | None = None) -> Dag:
        edges = frozenset(
            (int(j), int(i)) for i, j in zip(*np.nonzero(self.a))
        )
        return Dag(self.p, edges, node_labels)


def simulate_dag(cfg: SimConfig) -> WeightedDag:
    """Random lower-triangular weighted DAG with ~s expected neighbors."""
    rng = rng_for(cfg.seed, STAGE_DAG)
    p = cfg.p
    prob = cfg.s / (p - 1)
    present = rng.uniform(size=(p, p)) < prob
    magnitude = rng.uniform(WEIGHT_LO, WEIGHT_HI, size=(p, p))
    sign = np.where(rng.uniform(size=(p, p)) < 0.5, -1.0, 1.0)
    a = np.where(present, sign * magnitude, 0.0)
    a[np.triu_indices(p)] = 0.0
    return WeightedDag(a)


def simulate_latent(a: WeightedDag, n: int, seed: int) -> np.ndarray:
    """n rows of Z = eps (I - A)^{-T}, i.e. Z_i = sum_{j<i} a_ij Z_j + eps_i."""
    rng = rng_for(seed, STAGE_LATENT)
    eps = rng.standard_normal((n, a.p))
    lhs = np.eye(a.p) - a.a
    return solve_triangular(lhs, eps.T, lower=True, unit_diagonal=True).T


def binary_margin(z: np.ndarray, theta: float) -> np.ndarray:
    """X = 1{Phi(z) > 1 - theta}, so P(X = 1) = theta for standard normal z."""
    return (norm.cdf(z) > 1.0 - theta).astype(np.int64)


def ordinal_margin(z: np.ndarray, theta: float) -> np.ndarray:
    """Binomial(4, theta) quantile of Phi(z), stored as levels 1..5.

    Left-continuous inverse (smallest k with CDF(k) >= u); u is clipped
    away from 0 so the quantile stays on the 0..4 support.
    """
    u = np.clip(norm.cdf(z), np.finfo(np.float64).tiny, 1.0)
    return binom.ppf(u, ORDINAL_TRIALS, theta).astype(np.int64) + 1


def mixify(z: np.ndarray, seed: int) -> MixedDataset:
    """Collapse the first p/2 columns to binary or ordinal margins.

    Each discrete column flips a fair coin between a binary margin and an
    ordinal margin, with theta ~ U(0.2, 0.8) drawn per column. Remaining
    columns stay continuous.
    """
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 2 or z.shape[1] % 2 != 0:
        raise ValueError("latent matrix must be n x p with p even")
    rng = rng_for(seed, STAGE_MIX)
    p = z.shape[1]
    cols: list[Column] = []
    for j in range(p // 2):
        is_binary = rng.uniform() < 0.5
        theta = rng.uniform(0.2, 0.8)
        if is_binary:
            cols.append(Column("binary", binary_margin(z[:, j], theta)))
        else:
            cols.append(
                Column("ordinal", ordinal_margin(z[:, j], theta), levels=ORDINAL_TRIALS + 1)
            )
    for j in range(p // 2, p):
        cols.append(Column("continuous", z[:, j]))
    labels = tuple(f"X{i}" for i in range(p))
    return MixedDataset(tuple(cols), labels)


def simulate_dataset(cfg: SimConfig) -> tuple[MixedDataset, Dag]:
    """Full pipeline: random DAG, latent draws, mixed margins, truth graph."""
    wdag = simulate_dag(cfg)
    z = simulate_latent(wdag, cfg.n, cfg.seed)
    data = mixify(z, cfg.seed)
    return data, wdag.to_dag(data.labels)
