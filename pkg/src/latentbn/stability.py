"""Bootstrap-stabilized structure learning.

The hybrid learner is rerun on B bootstrap resamples; ordered-edge
frequencies summarize how stably each edge appears. A data-driven inclusion
threshold separates signal pairs from noise pairs, and a consensus DAG is
assembled from the pairs above it, oriented by majority direction with
cycle repair.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .citest import CiTestConfig
from .data import MixedDataset
from .errors import DegenerateColumnError
from .graphs import Dag, Edge
from .rngs import STAGE_BOOT, rng_for
from .scores import ScoreConfig
from .search import SearchConfig, latent_mmhc

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EdgeStrengthTable:
    """Per-ordered-pair appearance frequencies over bootstrap replicates."""

    frequencies: np.ndarray  # frequencies[i, j] = share of replicates with i -> j
    replicates: int
    labels: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        f = np.array(self.frequencies, dtype=np.float64)
        if f.ndim != 2 or f.shape[0] != f.shape[1]:
            raise ValueError("frequency table must be square")
        if self.replicates < 1:
            raise ValueError("replicates must be positive")
        if np.any(f < 0.0) or np.any(f > 1.0):
            raise ValueError("frequencies must lie in [0, 1]")
        if np.any(np.diag(f) != 0.0):
            raise ValueError("self loops cannot have positive frequency")
        # A DAG holds at most one orientation per pair, so strengths cap at 1.
        if np.any(f + f.T > 1.0 + 1e-9):
            raise ValueError("pair strength exceeds 1")
        if self.labels is not None:
            labels = tuple(str(x) for x in self.labels)
            if len(labels) != f.shape[0]:
                raise ValueError("labels must match the node count")
            object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "frequencies", f)
        f.setflags(write=False)

    @property
    def node_count(self) -> int:
        return int(self.frequencies.shape[0])

    def strength(self, i: int, j: int) -> float:
        """Adjacency strength of the unordered pair: freq(i->j) + freq(j->i)."""
        return float(self.frequencies[i, j] + self.frequencies[j, i])

    def pair_strengths(self) -> list[tuple[Edge, float]]:
        p = self.node_count
        return [
            ((i, j), self.strength(i, j)) for i in range(p) for j in range(i + 1, p)
        ]


def _resample(
    data: MixedDataset, seed: int, replicate: int, max_retries: int
) -> MixedDataset:
    for attempt in range(max_retries):
        rng = rng_for(seed, STAGE_BOOT, replicate, attempt)
        rows = rng.integers(0, data.n, size=data.n)
        sub = data.take_rows(rows)
        if all(np.ptp(c.values) > 0 for c in sub.columns):
            return sub
        logger.warning(
            "bootstrap replicate %d drew a degenerate column (attempt %d), redrawing",
            replicate,
            attempt + 1,
        )
    raise DegenerateColumnError(
        f"replicate {replicate}: a column stayed constant after "
        f"{max_retries} redraws; the data are too sparse to resample"
    )


def bootstrap_learn(
    data: MixedDataset,
    b: int = 200,
    ci_cfg: CiTestConfig | None = None,
    score_cfg: ScoreConfig | None = None,
    search_cfg: SearchConfig | None = None,
    seed: int = 0,
    max_retries: int = 10,
) -> EdgeStrengthTable:
    """Edge frequencies of the hybrid learner over B bootstrap resamples.

    Each replicate resamples n rows with replacement from its own RNG
    stream (so the table is independent of evaluation order), redrawing up
    to max_retries times if a column comes back constant.
    """
    if b < 1:
        raise ValueError("b must be positive")
    counts = np.zeros((data.p, data.p))
    for rep in range(b):
        sub = _resample(data, seed, rep, max_retries)
        dag = latent_mmhc(sub, ci_cfg, score_cfg, search_cfg)
        for i, j in dag.edges:
            counts[i, j] += 1.0
    return EdgeStrengthTable(counts / b, b, labels=data.labels)


def inclusion_threshold(table: EdgeStrengthTable) -> float:
    """Strength cutoff separating stable pairs from noise pairs.

    In an ideal table every pair would have strength 0 or 1. For each
    candidate cutoff t at an observed strength value, score the ideal
    assignment 1{s_k >= t} by its L1 distance sum_k |s_k - 1{s_k >= t}| to
    the observed strengths and keep the best cutoff; ties resolve to the
    largest candidate (the sparser consensus). If every pair has the same
    strength there is nothing to separate and the cutoff falls back to 0.5.
    """
    strengths = np.array([s for _, s in table.pair_strengths()])
    if strengths.size == 0:
        return 0.5
    candidates = np.unique(strengths)
    if candidates.size == 1:
        return 0.5
    best_t, best_cost = 0.5, np.inf
    for t in candidates:
        ideal = (strengths >= t).astype(np.float64)
        cost = float(np.abs(strengths - ideal).sum())
        if cost <= best_cost:
            best_cost, best_t = cost, float(t)
    return best_t


def consensus_dag(table: EdgeStrengthTable, threshold: float | None = None) -> Dag:
    """Majority-direction DAG over the pairs at or above the threshold.

    Pairs are inserted in descending-strength order (ties broken by index
    pair). Each pair takes its more frequent orientation, the lower index
    winning exact ties; if that would close a cycle the edge is reversed,
    and dropped with a log message if both directions would (which cannot
    happen while the inserted edges form a DAG, but is kept as a guard).
    """
    t = inclusion_threshold(table) if threshold is None else float(threshold)
    ordered = sorted(table.pair_strengths(), key=lambda ps: (-ps[1], ps[0]))
    f = table.frequencies
    edges: set[Edge] = set()
    children: dict[int, set[int]] = {v: set() for v in range(table.node_count)}

    def creates_cycle(a: int, b: int) -> bool:
        stack, seen = [b], {b}
        while stack:
            u = stack.pop()
            if u == a:
                return True
            for v in children[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return False

    for (i, j), s in ordered:
        if s < t:
            break
        first = (i, j) if f[i, j] >= f[j, i] else (j, i)
        second = (first[1], first[0])
        if not creates_cycle(*first):
            chosen = first
        elif not creates_cycle(*second):
            logger.warning("consensus reversed %s to avoid a cycle", first)
            chosen = second
        else:
            logger.warning("consensus dropped pair (%d, %d): both directions cycle", i, j)
            continue
        edges.add(chosen)
        children[chosen[0]].add(chosen[1])
    return Dag(table.node_count, frozenset(edges), table.labels)


def stable_latent_mmhc(
    data: MixedDataset,
    b: int = 200,
    threshold: float | None = None,
    ci_cfg: CiTestConfig | None = None,
    score_cfg: ScoreConfig | None = None,
    search_cfg: SearchConfig | None = None,
    seed: int = 0,
) -> Dag:
    """Bootstrap the hybrid learner and return the consensus DAG."""
    table = bootstrap_learn(data, b, ci_cfg, score_cfg, search_cfg, seed=seed)
    return consensus_dag(table, threshold)
