"""Tabu search over DAGs and the two-phase hybrid learner.

The hybrid learner runs the PC-stable skeleton on the latent correlation
matrix first, discards the orientations, and then score-searches with every
ordered pair outside the skeleton blacklisted, so the score phase only
decides directions and prunes within the constraint-phase adjacencies.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, replace
from math import inf

import numpy as np

from .citest import CiTestConfig, pc_skeleton
from .data import MixedDataset
from .errors import CollinearityError
from .graphs import Dag, Edge
from .latentcorr import estimate_latent_sigma, normal_scores
from .scores import ScoreConfig, Scorer, gauss_scorer, sem_scorer

logger = logging.getLogger(__name__)

# Candidate moves are ranked by score gain; ties fall back to this move-kind
# order and then the (from, to) pair, so runs are reproducible.
_KIND_ORDER = {"add": 0, "delete": 1, "reverse": 2}


@dataclass(frozen=True)
class SearchConfig:
    blacklist: frozenset[Edge] = frozenset()
    tabu_length: int = 10
    max_iterations: int = 10000
    max_worse_moves: int = 20
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "blacklist", frozenset((int(i), int(j)) for i, j in self.blacklist)
        )
        for i, j in self.blacklist:
            if i == j:
                raise ValueError("blacklist may not contain self loops")
        if self.tabu_length < 0 or self.max_worse_moves < 0:
            raise ValueError("tabu_length and max_worse_moves must be nonnegative")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")


def tabu_search(
    scorer: Scorer,
    node_count: int,
    cfg: SearchConfig | None = None,
    node_labels: tuple[str, ...] | None = None,
) -> Dag:
    """Greedy add/delete/reverse search with a tabu list, from the empty DAG.

    Each step applies the best acyclicity-preserving, non-blacklisted move
    that is either non-tabu or beats the incumbent best score (aspiration).
    The reverse of an applied move stays tabu for tabu_length steps. The
    search stops after max_worse_moves consecutive steps without a new
    incumbent, when no move is eligible, or at max_iterations, and returns
    the best DAG seen. Moves scoring as collinear are treated as -inf.
    """
    cfg = cfg or SearchConfig()
    p = node_count
    blacklist = cfg.blacklist

    cache: dict[tuple[int, tuple[int, ...]], float] = {}

    def local(j: int, parents: set[int]) -> float:
        key = (j, tuple(sorted(parents)))
        if key not in cache:
            try:
                cache[key] = float(scorer(j, key[1]))
            except CollinearityError:
                cache[key] = -inf
        return cache[key]

    parents: dict[int, set[int]] = {j: set() for j in range(p)}
    children: dict[int, set[int]] = {i: set() for i in range(p)}
    edges: set[Edge] = set()

    def has_path(src: int, dst: int, skip: Edge | None = None) -> bool:
        stack = [src]
        seen = {src}
        while stack:
            u = stack.pop()
            if u == dst:
                return True
            for v in children[u]:
                if skip is not None and (u, v) == skip:
                    continue
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return False

    node_scores = [local(j, parents[j]) for j in range(p)]
    current = sum(node_scores)
    best_score = current
    best_edges: frozenset[Edge] = frozenset()
    tabu: deque = deque(maxlen=cfg.tabu_length) if cfg.tabu_length > 0 else deque(maxlen=0)

    worse = 0
    for _ in range(cfg.max_iterations):
        best_move = None
        best_delta = -inf

        def consider(move, delta) -> None:
            nonlocal best_move, best_delta
            if delta == -inf:
                return
            if move in tabu and not (current + delta > best_score):
                return  # tabu without aspiration
            if delta > best_delta:
                best_delta = delta
                best_move = move

        for i in range(p):
            for j in range(p):
                if i == j or (i, j) in edges or (j, i) in edges:
                    continue
                if (i, j) in blacklist or has_path(j, i):
                    continue
                delta = local(j, parents[j] | {i}) - node_scores[j]
                consider(("add", i, j), delta)
        for i, j in sorted(edges):
            delta = local(j, parents[j] - {i}) - node_scores[j]
            consider(("delete", i, j), delta)
        for i, j in sorted(edges):
            if (j, i) in blacklist or has_path(i, j, skip=(i, j)):
                continue
            delta = (
                local(j, parents[j] - {i})
                - node_scores[j]
                + local(i, parents[i] | {j})
                - node_scores[i]
            )
            consider(("reverse", i, j), delta)

        if best_move is None:
            break

        kind, i, j = best_move
        if kind == "add":
            edges.add((i, j))
            parents[j].add(i)
            children[i].add(j)
            tabu.append(("delete", i, j))
        elif kind == "delete":
            edges.discard((i, j))
            parents[j].discard(i)
            children[i].discard(j)
            tabu.append(("add", i, j))
        else:
            edges.discard((i, j))
            parents[j].discard(i)
            children[i].discard(j)
            edges.add((j, i))
            parents[i].add(j)
            children[j].add(i)
            tabu.append(("reverse", j, i))
        for node in {i, j}:
            node_scores[node] = local(node, parents[node])
        current = sum(node_scores)

        if current > best_score:
            best_score = current
            best_edges = frozenset(edges)
            worse = 0
        else:
            worse += 1
            if worse > cfg.max_worse_moves:
                break

    return Dag(p, best_edges, node_labels)


def _make_scorer(
    score_cfg: ScoreConfig, sigma: np.ndarray | None, scores: np.ndarray | None
) -> Scorer:
    if score_cfg.score_kind == "sem":
        if scores is None:
            raise ValueError("sem scoring needs the normal-score matrix")
        return sem_scorer(scores, score_cfg)
    if sigma is None:
        raise ValueError("gauss scoring needs the latent correlation matrix")
    return gauss_scorer(sigma, score_cfg)


def skeleton_blacklist(
    node_count: int, skeleton_pairs: frozenset[Edge], user_blacklist: frozenset[Edge]
) -> frozenset[Edge]:
    """Forbid every ordered pair whose adjacency the skeleton rejected."""
    forbidden = set(user_blacklist)
    for i in range(node_count):
        for j in range(node_count):
            if i != j and (min(i, j), max(i, j)) not in skeleton_pairs:
                forbidden.add((i, j))
    return frozenset(forbidden)


def latent_mmhc_from_stats(
    sigma: np.ndarray,
    scores: np.ndarray | None,
    ci_cfg: CiTestConfig,
    score_cfg: ScoreConfig,
    search_cfg: SearchConfig | None = None,
    node_labels: tuple[str, ...] | None = None,
) -> Dag:
    """Both hybrid phases on precomputed latent statistics.

    Kept separate from latent_mmhc so benchmark timing can exclude the
    construction of sigma and the normal scores.
    """
    search_cfg = search_cfg or SearchConfig()
    p = sigma.shape[0]
    user = search_cfg.blacklist
    excluded = [(i, j) for i, j in user if i < j and (j, i) in user]
    skeleton, _ = pc_skeleton(sigma, ci_cfg, excluded_pairs=excluded)
    forbidden = skeleton_blacklist(p, skeleton.undirected_edges, user)
    scorer = _make_scorer(score_cfg, sigma, scores)
    return tabu_search(
        scorer, p, replace(search_cfg, blacklist=forbidden), node_labels=node_labels
    )


def latent_mmhc(
    data: MixedDataset,
    ci_cfg: CiTestConfig | None = None,
    score_cfg: ScoreConfig | None = None,
    search_cfg: SearchConfig | None = None,
) -> Dag:
    """Hybrid learner: PC-stable skeleton restricts a tabu score search."""
    ci_cfg = ci_cfg or CiTestConfig()
    if ci_cfg.effective_n is None:
        ci_cfg = replace(ci_cfg, effective_n=data.n)
    score_cfg = score_cfg or ScoreConfig("sem")
    if score_cfg.n is None:
        score_cfg = replace(score_cfg, n=data.n)
    sigma = estimate_latent_sigma(data)
    scores = normal_scores(data) if score_cfg.score_kind == "sem" else None
    return latent_mmhc_from_stats(
        sigma, scores, ci_cfg, score_cfg, search_cfg, node_labels=data.labels
    )


def score_based_only(
    data: MixedDataset,
    score_cfg: ScoreConfig | None = None,
    search_cfg: SearchConfig | None = None,
) -> Dag:
    """Pure score search without the constraint phase (baseline)."""
    score_cfg = score_cfg or ScoreConfig("sem")
    if score_cfg.n is None:
        score_cfg = replace(score_cfg, n=data.n)
    if score_cfg.score_kind == "sem":
        scorer = sem_scorer(normal_scores(data), score_cfg)
    else:
        scorer = gauss_scorer(estimate_latent_sigma(data), score_cfg)
    return tabu_search(scorer, data.p, search_cfg, node_labels=data.labels)
