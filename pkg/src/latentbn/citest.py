"""Fisher-z conditional independence tests and the PC-stable skeleton.

All tests run against a latent correlation matrix rather than raw data, so
the same machinery serves population studies (exact matrices, huge
effective n) and finite-sample estimates. The skeleton phase is PC-stable:
conditioning sets at each level are drawn from adjacency snapshots taken at
the level start, which makes the surviving skeleton invariant to column
order.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from itertools import combinations
from typing import Iterable, NamedTuple

import numpy as np
from scipy import stats

from .data import MixedDataset
from .errors import IllConditionedError, InsufficientSampleError
from .graphs import Edge, Pdag, orient_with_meek
from .latentcorr import estimate_latent_sigma

logger = logging.getLogger(__name__)

RHO_CLAMP = 0.999999


@dataclass(frozen=True)
class CiTestConfig:
    """Fisher-z test settings.

    effective_n is the sample size entering the test statistic; the latent
    estimator uses the raw n even though tau-based correlations are not a
    sample average over n latent observations. max_condition_size caps the
    PC level; it is additionally bounded so the z-test keeps positive
    degrees of freedom.
    """

    alpha: float = 0.01
    effective_n: int | None = None
    max_condition_size: int | None = None

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie strictly between 0 and 1")
        if self.effective_n is not None and self.effective_n < 4:
            raise ValueError("effective_n must be at least 4")
        if self.max_condition_size is not None and self.max_condition_size < 0:
            raise ValueError("max_condition_size must be nonnegative")


class CiResult(NamedTuple):
    independent: bool
    statistic: float


def partial_correlation(sigma: np.ndarray, i: int, j: int, s: Iterable[int]) -> float:
    """Partial correlation of (i, j) given s from a correlation matrix.

    Computed as -omega_ij / sqrt(omega_ii * omega_jj) with omega the inverse
    of the submatrix over {i, j} | s, clamped to +-0.999999 so the Fisher
    transform stays finite. A singular submatrix raises IllConditionedError.
    """
    s = sorted({int(v) for v in s})
    p = sigma.shape[0]
    if i == j or i in s or j in s:
        raise ValueError("i, j, and s must be disjoint")
    if not all(0 <= v < p for v in (i, j, *s)):
        raise ValueError("index out of range")
    if not s:
        rho = float(sigma[i, j])
        return float(np.clip(rho, -RHO_CLAMP, RHO_CLAMP))
    idx = [i, j, *s]
    try:
        omega = np.linalg.inv(sigma[np.ix_(idx, idx)])
    except np.linalg.LinAlgError as exc:
        raise IllConditionedError(f"singular submatrix for ({i}, {j} | {s})") from exc
    denom = omega[0, 0] * omega[1, 1]
    if not np.isfinite(omega).all() or denom <= 0.0:
        raise IllConditionedError(f"ill-conditioned submatrix for ({i}, {j} | {s})")
    rho = float(-omega[0, 1] / np.sqrt(denom))
    if not np.isfinite(rho):
        raise IllConditionedError(f"ill-conditioned submatrix for ({i}, {j} | {s})")
    return float(np.clip(rho, -RHO_CLAMP, RHO_CLAMP))


def ci_test(
    sigma: np.ndarray, i: int, j: int, s: Iterable[int], cfg: CiTestConfig
) -> CiResult:
    """Fisher-z test of rho(i, j | s) = 0.

    The statistic is sqrt(n - |s| - 3) * |arctanh(rho)|; independence is
    declared when it does not exceed the two-sided normal quantile at
    level alpha.
    """
    s = sorted({int(v) for v in s})
    if cfg.effective_n is None:
        raise ValueError("cfg.effective_n is required")
    df = cfg.effective_n - len(s) - 3
    if df <= 0:
        raise InsufficientSampleError(
            f"effective_n={cfg.effective_n} cannot test |s|={len(s)}"
        )
    rho = partial_correlation(sigma, i, j, s)
    statistic = float(np.sqrt(df) * np.abs(np.arctanh(rho)))
    threshold = float(stats.norm.ppf(1.0 - cfg.alpha / 2.0))
    return CiResult(independent=statistic <= threshold, statistic=statistic)


def pc_skeleton(
    sigma: np.ndarray,
    cfg: CiTestConfig,
    excluded_pairs: Iterable[Edge] = (),
) -> tuple[Pdag, dict[Edge, frozenset[int]]]:
    """PC-stable skeleton over a correlation matrix.

    Starts complete, then at level l = 0, 1, ... tests every adjacent pair
    against all size-l subsets of the level-start adjacency of either
    endpoint, deleting on the first independence and recording the
    separating set. Ill-conditioned tests count as dependent (logged).
    Pairs in excluded_pairs are removed up front with an empty separating
    set. Returns the undirected skeleton and the separating sets keyed by
    (i, j) with i < j.
    """
    p = sigma.shape[0]
    if cfg.effective_n is None:
        raise ValueError("cfg.effective_n is required")
    adj: dict[int, set[int]] = {i: set(range(p)) - {i} for i in range(p)}
    sepsets: dict[Edge, frozenset[int]] = {}
    for a, b in excluded_pairs:
        if a == b:
            raise ValueError("excluded pair may not be a self loop")
        adj[a].discard(b)
        adj[b].discard(a)
        sepsets[(min(a, b), max(a, b))] = frozenset()

    cap = cfg.effective_n - 4  # keeps sqrt(n - |s| - 3) real and positive
    if cfg.max_condition_size is not None:
        cap = min(cap, cfg.max_condition_size)

    level = 0
    while level <= cap:
        snapshot = {i: tuple(sorted(adj[i])) for i in range(p)}
        pairs = sorted(
            (i, j) for i in range(p) for j in adj[i] if i < j
        )
        any_testable = False
        for i, j in pairs:
            if j not in adj[i]:
                continue  # already removed at this level
            removed = False
            for side, other in ((i, j), (j, i)):
                cands = [k for k in snapshot[side] if k != other]
                if len(cands) < level:
                    continue
                any_testable = True
                for s in combinations(cands, level):
                    try:
                        res = ci_test(sigma, i, j, s, cfg)
                    except IllConditionedError:
                        logger.warning(
                            "treating (%d, %d | %s) as dependent: singular test", i, j, s
                        )
                        continue
                    if res.independent:
                        adj[i].discard(j)
                        adj[j].discard(i)
                        sepsets[(i, j)] = frozenset(s)
                        removed = True
                        break
                if removed:
                    break
        if not any_testable:
            break
        level += 1

    skeleton = frozenset((i, j) for i in range(p) for j in adj[i] if i < j)
    return Pdag(p, frozenset(), skeleton), sepsets


def orient_v_structures(
    node_count: int,
    skeleton_pairs: Iterable[Edge],
    sepsets: dict[Edge, frozenset[int]],
) -> dict[Edge, Edge]:
    """Collider orientations i -> k <- j for nonadjacent (i, j), k off the sepset.

    Triples are visited in (i, j, k) lexicographic order and conflicting
    re-orientations of a pair are logged, with the last write winning, so
    the output is deterministic.
    """
    pairs = {(min(i, j), max(i, j)) for i, j in skeleton_pairs}
    adj: dict[int, set[int]] = {v: set() for v in range(node_count)}
    for a, b in pairs:
        adj[a].add(b)
        adj[b].add(a)
    oriented: dict[Edge, Edge] = {}
    for i in range(node_count):
        for j in range(i + 1, node_count):
            if (i, j) in pairs:
                continue
            sep = sepsets.get((i, j), frozenset())
            for k in sorted(adj[i] & adj[j]):
                if k in sep:
                    continue
                for f, t in ((i, k), (j, k)):
                    key = (min(f, t), max(f, t))
                    prev = oriented.get(key)
                    if prev is not None and prev != (f, t):
                        logger.warning(
                            "conflicting collider orientations for pair %s; keeping %s",
                            key,
                            (f, t),
                        )
                    oriented[key] = (f, t)
    return oriented


def pc_cpdag(
    sigma: np.ndarray,
    cfg: CiTestConfig,
    excluded_pairs: Iterable[Edge] = (),
    node_labels: tuple[str, ...] | None = None,
) -> Pdag:
    """PC-stable skeleton plus collider orientation and Meek completion."""
    skeleton, sepsets = pc_skeleton(sigma, cfg, excluded_pairs)
    oriented = orient_v_structures(skeleton.node_count, skeleton.undirected_edges, sepsets)
    return orient_with_meek(
        skeleton.node_count,
        skeleton.undirected_edges,
        oriented.values(),
        node_labels=node_labels,
    )


def latent_pc(data: MixedDataset, cfg: CiTestConfig | None = None) -> Pdag:
    """Constraint-based baseline: latent correlations, PC-stable, Meek rules."""
    cfg = cfg or CiTestConfig()
    if cfg.effective_n is None:
        cfg = replace(cfg, effective_n=data.n)
    sigma = estimate_latent_sigma(data)
    return pc_cpdag(sigma, cfg, node_labels=data.labels)
