"""Experiment grid runner: simulate, learn with several methods, score.

Each replicate draws a fresh DAG and dataset, hands the same precomputed
latent statistics to every method, and records structural metrics plus
the wall-clock runtime of the learning step only (latent-correlation and
normal-score construction is shared setup and excluded from timing).
"""

from __future__ import annotations

import csv
import json
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .citest import CiTestConfig, pc_cpdag
from .data import MixedDataset
from .graphs import Dag, Pdag, sensitivity_specificity
from .latentcorr import estimate_latent_sigma, normal_scores
from .rngs import spawn_seed
from .scores import ScoreConfig, gauss_scorer, sem_scorer
from .search import SearchConfig, latent_mmhc_from_stats, tabu_search
from .simulate import SimConfig, simulate_dataset
from .stability import stable_latent_mmhc


@dataclass(frozen=True)
class ReplicateContext:
    """Shared per-dataset inputs handed to every method."""

    data: MixedDataset
    truth: Dag
    sigma: np.ndarray
    scores: np.ndarray
    seed: int

    @property
    def n(self) -> int:
        return self.data.n

    @property
    def p(self) -> int:
        return self.data.p


@dataclass(frozen=True)
class BenchmarkOptions:
    alpha: float = 0.01
    stable_b: int = 200
    stable_threshold: float | None = None
    search: SearchConfig = SearchConfig()

    def ci_cfg(self, n: int) -> CiTestConfig:
        return CiTestConfig(alpha=self.alpha, effective_n=n)


def _run_latent_pc(ctx: ReplicateContext, opts: BenchmarkOptions) -> Pdag:
    return pc_cpdag(ctx.sigma, opts.ci_cfg(ctx.n), node_labels=ctx.data.labels)


def _run_latent_mmhc_sem(ctx: ReplicateContext, opts: BenchmarkOptions) -> Dag:
    return latent_mmhc_from_stats(
        ctx.sigma,
        ctx.scores,
        opts.ci_cfg(ctx.n),
        ScoreConfig("sem", n=ctx.n),
        opts.search,
        node_labels=ctx.data.labels,
    )


def _run_latent_mmhc_gauss(ctx: ReplicateContext, opts: BenchmarkOptions) -> Dag:
    return latent_mmhc_from_stats(
        ctx.sigma,
        None,
        opts.ci_cfg(ctx.n),
        ScoreConfig("gauss", n=ctx.n),
        opts.search,
        node_labels=ctx.data.labels,
    )


def _run_score_sem(ctx: ReplicateContext, opts: BenchmarkOptions) -> Dag:
    scorer = sem_scorer(ctx.scores, ScoreConfig("sem", n=ctx.n))
    return tabu_search(scorer, ctx.p, opts.search, node_labels=ctx.data.labels)


def _run_score_latent(ctx: ReplicateContext, opts: BenchmarkOptions) -> Dag:
    scorer = gauss_scorer(ctx.sigma, ScoreConfig("gauss", n=ctx.n))
    return tabu_search(scorer, ctx.p, opts.search, node_labels=ctx.data.labels)


def _run_stable(ctx: ReplicateContext, opts: BenchmarkOptions) -> Dag:
    return stable_latent_mmhc(
        ctx.data,
        b=opts.stable_b,
        threshold=opts.stable_threshold,
        ci_cfg=opts.ci_cfg(ctx.n),
        search_cfg=opts.search,
        seed=ctx.seed,
    )


def _run_oracle(ctx: ReplicateContext, opts: BenchmarkOptions) -> Dag:
    return ctx.truth


METHODS = {
    "latent-pc": _run_latent_pc,
    "latent-mmhc-sem": _run_latent_mmhc_sem,
    "latent-mmhc-gauss": _run_latent_mmhc_gauss,
    "score-sem": _run_score_sem,
    "score-latent": _run_score_latent,
    "stable-latent-mmhc": _run_stable,
    "oracle": _run_oracle,
}
PDAG_METHODS = frozenset({"latent-pc"})


@dataclass(frozen=True)
class BenchmarkRow:
    method: str
    p: int
    n: int
    s: float
    replicate: int
    shd: int
    sensitivity: float
    specificity: float
    runtime_seconds: float


@dataclass(frozen=True)
class BenchmarkFailure:
    method: str
    p: int
    n: int
    s: float
    replicate: int
    error: str


def _median_key(row) -> tuple:
    return (row.method, row.p, row.n, row.s)


@dataclass(frozen=True)
class BenchmarkReport:
    rows: tuple[BenchmarkRow, ...]
    failures: tuple[BenchmarkFailure, ...]
    shd_mode: str

    def medians(self) -> dict[tuple, dict[str, float]]:
        """Per-(method, p, n, s) medians over the successful replicates."""
        groups: dict[tuple, list[BenchmarkRow]] = {}
        for row in self.rows:
            groups.setdefault(_median_key(row), []).append(row)
        failed: dict[tuple, int] = {}
        for f in self.failures:
            failed[_median_key(f)] = failed.get(_median_key(f), 0) + 1
        out = {}
        for key in sorted(set(groups) | set(failed)):
            rows = groups.get(key, [])
            entry: dict[str, float] = {
                "replicates": len(rows),
                "failures": failed.get(key, 0),
            }
            if rows:
                for field in ("shd", "sensitivity", "specificity", "runtime_seconds"):
                    entry[field] = statistics.median(
                        getattr(r, field) for r in rows
                    )
            out[key] = entry
        return out


def resolve_shd_mode(methods, shd_mode: str | None) -> str:
    """cpdag comparison whenever some method reports an equivalence class."""
    if shd_mode is not None:
        if shd_mode not in ("dag", "cpdag"):
            raise ValueError(f"unknown shd mode {shd_mode!r}")
        return shd_mode
    return "cpdag" if any(m in PDAG_METHODS for m in methods) else "dag"


def _build_context(cell: SimConfig, rep_seed: int) -> ReplicateContext:
    cfg = replace(cell, seed=rep_seed)
    data, truth = simulate_dataset(cfg)
    sigma = estimate_latent_sigma(data)
    scores = normal_scores(data)
    return ReplicateContext(data, truth, sigma, scores, rep_seed)


def _replicate_task(args) -> tuple[list[BenchmarkRow], list[BenchmarkFailure]]:
    cell, rep, rep_seed, methods, opts, mode = args
    meta = dict(p=cell.p, n=cell.n, s=cell.s, replicate=rep)
    try:
        ctx = _build_context(cell, rep_seed)
    except Exception as exc:  # setup failure blanks every method
        fails = [BenchmarkFailure(m, error=str(exc), **meta) for m in methods]
        return [], fails
    rows, fails = [], []
    for m in methods:
        runner = METHODS[m]
        try:
            start = time.perf_counter()
            graph = runner(ctx, opts)
            elapsed = time.perf_counter() - start
        except Exception as exc:
            fails.append(BenchmarkFailure(m, error=str(exc), **meta))
            continue
        metrics = sensitivity_specificity(graph, ctx.truth, shd_mode=mode)
        rows.append(
            BenchmarkRow(
                m,
                shd=metrics.shd,
                sensitivity=metrics.sensitivity,
                specificity=metrics.specificity,
                runtime_seconds=elapsed,
                **meta,
            )
        )
    return rows, fails


def run_benchmark(
    cells,
    methods,
    replicates: int = 50,
    seed: int = 0,
    opts: BenchmarkOptions | None = None,
    shd_mode: str | None = None,
    threads: int = 1,
) -> BenchmarkReport:
    """Every method on every replicate of every grid cell.

    Per-replicate seeds derive from (seed, cell index, replicate), so any
    single replicate can be reproduced in isolation and results do not
    depend on execution schedule. Method failures are recorded and
    excluded from medians rather than aborting the run.
    """
    cells = [c if isinstance(c, SimConfig) else SimConfig(*c) for c in cells]
    methods = list(methods)
    unknown = [m for m in methods if m not in METHODS]
    if unknown:
        raise ValueError(f"unknown methods: {unknown}")
    if replicates < 1:
        raise ValueError("replicates must be positive")
    if threads < 1:
        raise ValueError("threads must be positive")
    opts = opts or BenchmarkOptions()
    mode = resolve_shd_mode(methods, shd_mode)
    tasks = [
        (cell, rep, spawn_seed(seed, ci, rep), methods, opts, mode)
        for ci, cell in enumerate(cells)
        for rep in range(replicates)
    ]
    if threads == 1:
        results = [_replicate_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_replicate_task, tasks))
    rows: list[BenchmarkRow] = []
    failures: list[BenchmarkFailure] = []
    for r, f in results:
        rows.extend(r)
        failures.extend(f)
    rows.sort(key=lambda r: (_median_key(r), r.replicate))
    failures.sort(key=lambda r: (_median_key(r), r.replicate))
    return BenchmarkReport(tuple(rows), tuple(failures), mode)


REPORT_FIELDS = (
    "method",
    "p",
    "n",
    "s",
    "replicate",
    "shd",
    "sensitivity",
    "specificity",
    "runtime_seconds",
)


def report_to_csv(report: BenchmarkReport, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_FIELDS)
        for row in report.rows:
            w.writerow([repr(v) if isinstance(v, float) else v
                        for v in (getattr(row, f) for f in REPORT_FIELDS)])


def medians_to_json(report: BenchmarkReport, path: str | Path) -> None:
    payload = {
        "shd_mode": report.shd_mode,
        "failure_count": len(report.failures),
        "medians": {
            f"{method}|p={p}|n={n}|s={s:g}": entry
            for (method, p, n, s), entry in report.medians().items()
        },
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")
