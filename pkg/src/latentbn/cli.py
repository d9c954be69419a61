"""Command-line interface: simulate, learn, benchmark, fit, infer.

Every subcommand writes its outputs plus a manifest.json recording the
full parameter set, input/output file hashes, and the tool version, so
deterministic runs can be reproduced byte-for-byte.
"""

from __future__ import annotations

import argparse
import csv
import difflib
import hashlib
import json
import os
import re
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .benchmark import (
    METHODS as BENCH_METHODS,
    BenchmarkOptions,
    medians_to_json,
    report_to_csv,
    run_benchmark,
)
from .charts import svg_grouped_bars
from .citest import CiTestConfig, pc_cpdag
from .data import read_dataset, write_dataset
from .discrete import (
    discretize_round,
    fit_cpts,
    network_from_json,
    network_to_json,
    query,
    sobol_first_order,
)
from .errors import LatentBnError
from .graphs import (
    Dag,
    Pdag,
    default_labels,
    graph_from_json,
    graph_to_dot,
    graph_to_json,
)
from .latentcorr import estimate_latent_sigma
from .scores import ScoreConfig
from .search import SearchConfig, latent_mmhc, score_based_only
from .simulate import SimConfig, simulate_dataset
from .stability import bootstrap_learn, consensus_dag, inclusion_threshold

LEARN_METHODS = (
    "latent-pc",
    "latent-mmhc-sem",
    "latent-mmhc-gauss",
    "score-sem",
    "score-latent",
    "stable-latent-mmhc",
)


def _sha256(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _json_safe(value):
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


def _write_manifest(out_dir: Path, command: str, args, inputs, outputs) -> Path:
    params = {
        k: _json_safe(v)
        for k, v in sorted(vars(args).items())
        if k not in ("func", "command")
    }
    doc = {
        "command": command,
        "version": __version__,
        "created_utc": datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
        "parameters": params,
        "inputs": {str(p): _sha256(p) for p in inputs},
        "outputs": {Path(p).name: _sha256(p) for p in outputs},
    }
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(doc, indent=2) + "\n")
    return path


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _suggest(name: str, options) -> str:
    close = difflib.get_close_matches(str(name), [str(o) for o in options], n=3)
    return f"; did you mean {', '.join(close)}?" if close else ""


def _label_index(labels, name: str, what: str = "column") -> int:
    if name in labels:
        return labels.index(name)
    raise ValueError(f"unknown {what} {name!r}{_suggest(name, labels)}")


def _types_path(args) -> Path:
    if args.types is not None:
        return Path(args.types)
    return Path(args.data).with_suffix(".types")


def _read_blacklist(path: Path, labels) -> frozenset[tuple[int, int]]:
    pairs = set()
    for ln, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or (ln == 1 and line.lower() == "from,to"):
            continue
        parts = [x.strip() for x in line.split(",")]
        if len(parts) != 2:
            raise ValueError(f"{path}:{ln}: expected 'from,to'")
        i = _label_index(labels, parts[0])
        j = _label_index(labels, parts[1])
        if i == j:
            raise ValueError(f"{path}:{ln}: an edge cannot forbid a self loop")
        pairs.add((i, j))
    return frozenset(pairs)


def _safe_name(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", label)


def _resolve_threads(args) -> int:
    if getattr(args, "threads", None) is not None:
        return args.threads
    return int(os.environ.get("LATENTBN_THREADS", "1"))


def cmd_simulate(args) -> int:
    out = _out_dir(args)
    cfg = SimConfig(p=args.p, n=args.n, s=args.s, seed=args.seed)
    data, truth = simulate_dataset(cfg)
    data_path, types_path = out / "data.csv", out / "data.types"
    write_dataset(data, data_path, types_path)
    truth_path = out / "truth.json"
    truth_path.write_text(graph_to_json(truth))
    _write_manifest(out, "simulate", args, [], [data_path, types_path, truth_path])
    print(f"wrote {data_path} ({data.n} rows, {data.p} columns) and {truth_path}")
    return 0


def cmd_learn(args) -> int:
    out = _out_dir(args)
    types_path = _types_path(args)
    data = read_dataset(args.data, types_path)
    inputs = [Path(args.data), types_path]
    blacklist = frozenset()
    if args.blacklist is not None:
        blacklist = _read_blacklist(args.blacklist, data.labels)
        inputs.append(Path(args.blacklist))
    ci = CiTestConfig(alpha=args.alpha, effective_n=data.n)
    search = SearchConfig(blacklist=blacklist, seed=args.seed)
    outputs = []
    if args.method == "latent-pc":
        excluded = [(i, j) for i, j in blacklist if i < j and (j, i) in blacklist]
        sigma = estimate_latent_sigma(data)
        graph = pc_cpdag(sigma, ci, excluded_pairs=excluded, node_labels=data.labels)
    elif args.method in ("latent-mmhc-sem", "latent-mmhc-gauss"):
        kind = "sem" if args.method.endswith("sem") else "gauss"
        graph = latent_mmhc(data, ci, ScoreConfig(kind), search)
    elif args.method in ("score-sem", "score-latent"):
        kind = "sem" if args.method == "score-sem" else "gauss"
        graph = score_based_only(data, ScoreConfig(kind), search)
    else:
        table = bootstrap_learn(
            data, b=args.b, ci_cfg=ci, search_cfg=search, seed=args.seed
        )
        threshold = (
            args.threshold if args.threshold is not None else inclusion_threshold(table)
        )
        graph = consensus_dag(table, threshold)
        strengths_path = out / "edge_strengths.csv"
        with strengths_path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["from", "to", "frequency"])
            f = table.frequencies
            for i in range(data.p):
                for j in range(data.p):
                    if f[i, j] > 0:
                        w.writerow(
                            [data.labels[i], data.labels[j], repr(float(f[i, j]))]
                        )
        outputs.append(strengths_path)
        print(f"inclusion threshold: {threshold:g}")
    graph_path = out / "graph.json"
    graph_path.write_text(graph_to_json(graph))
    outputs.insert(0, graph_path)
    if args.dot:
        dot_path = out / "graph.dot"
        dot_path.write_text(graph_to_dot(graph))
        outputs.append(dot_path)
    _write_manifest(out, "learn", args, inputs, outputs)
    if isinstance(graph, Pdag):
        n_edges = len(graph.directed_edges) + len(graph.undirected_edges)
    else:
        n_edges = len(graph.edges)
    print(f"wrote {graph_path} ({args.method}, {n_edges} edges)")
    return 0


def _parse_grid(spec: str):
    cells = []
    for chunk in spec.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        fields = {}
        for part in chunk.split(","):
            if "=" not in part:
                raise ValueError(f"grid cell {chunk!r}: expected k=v entries")
            k, v = (x.strip() for x in part.split("=", 1))
            fields[k] = v
        if set(fields) != {"p", "n", "s"}:
            raise ValueError(f"grid cell {chunk!r}: needs exactly p, n and s")
        cells.append(
            SimConfig(p=int(fields["p"]), n=int(fields["n"]), s=float(fields["s"]))
        )
    if not cells:
        raise ValueError("empty grid specification")
    return cells


def cmd_benchmark(args) -> int:
    out = _out_dir(args)
    cells = _parse_grid(args.grid)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    unknown = [m for m in methods if m not in BENCH_METHODS]
    if unknown:
        raise ValueError(
            f"unknown methods {unknown}; choices are {sorted(BENCH_METHODS)}"
        )
    opts = BenchmarkOptions(
        alpha=args.alpha, stable_b=args.stable_b, stable_threshold=args.threshold
    )
    mode = None if args.shd_mode == "auto" else args.shd_mode
    report = run_benchmark(
        cells,
        methods,
        replicates=args.replicates,
        seed=args.seed,
        opts=opts,
        shd_mode=mode,
        threads=_resolve_threads(args),
    )
    report_path, medians_path = out / "report.csv", out / "medians.json"
    report_to_csv(report, report_path)
    medians_to_json(report, medians_path)
    _write_manifest(out, "benchmark", args, [], [report_path, medians_path])
    print(
        f"wrote {report_path}: {len(report.rows)} rows, "
        f"{len(report.failures)} failures (shd mode {report.shd_mode})"
    )
    return 0


def _parse_ranges(spec: str) -> dict[str, tuple[int, int]]:
    ranges = {}
    if not spec:
        return ranges
    for part in spec.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part or ":" not in part.split("=", 1)[1]:
            raise ValueError(f"range {part!r}: expected 'column=lo:hi'")
        label, bounds = part.split("=", 1)
        lo, hi = bounds.split(":", 1)
        ranges[label.strip()] = (int(lo), int(hi))
    return ranges


def cmd_fit(args) -> int:
    out = _out_dir(args)
    types_path = _types_path(args)
    data = read_dataset(args.data, types_path)
    graph_text = Path(args.graph).read_text()
    graph = graph_from_json(graph_text)
    if isinstance(graph, Pdag):
        raise ValueError(
            "fitting needs a fully directed graph; this one has undirected edges"
        )
    glabels = default_labels(graph)
    missing = set(glabels) ^ set(data.labels)
    if missing:
        raise ValueError(
            f"graph and dataset disagree on columns: {sorted(missing)}"
        )
    edges = frozenset(
        (data.column_index(glabels[i]), data.column_index(glabels[j]))
        for i, j in graph.edges
    )
    dag = Dag(data.p, edges, data.labels)
    disc = discretize_round(data, _parse_ranges(args.ranges))
    net = fit_cpts(dag, disc, prior_alpha=args.prior_alpha)
    net_path = out / "network.json"
    net_path.write_text(network_to_json(net))
    _write_manifest(
        out, "fit", args, [Path(args.data), types_path, Path(args.graph)], [net_path]
    )
    print(f"wrote {net_path} ({net.node_count} nodes)")
    return 0


def _parse_evidence(net, items) -> dict[int, int]:
    labels = net.labels()
    evidence = {}
    for item in items or []:
        if "=" not in item:
            raise ValueError(f"evidence {item!r}: expected 'node=level'")
        name, level = (x.strip() for x in item.split("=", 1))
        node = _label_index(labels, name, "node")
        if node in evidence:
            raise ValueError(f"node {name!r} given twice in the evidence")
        evidence[node] = net.level_index(node, level)
    return evidence


def _write_table(path: Path, header, rows) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for name, vec in rows:
            w.writerow([name] + [repr(float(v)) for v in vec])


def cmd_infer(args) -> int:
    out = _out_dir(args)
    net = network_from_json(Path(args.network).read_text())
    labels = net.labels()
    inputs = [Path(args.network)]
    targets = [_label_index(labels, t, "node") for t in args.target or []]
    sobol_pairs = []
    for item in args.sobol or []:
        if ":" not in item:
            raise ValueError(f"sobol pair {item!r}: expected 'input:output'")
        a, b = (x.strip() for x in item.split(":", 1))
        sobol_pairs.append(
            (_label_index(labels, a, "node"), _label_index(labels, b, "node"))
        )
    if not targets and not sobol_pairs:
        raise ValueError("nothing to infer: give --target and/or --sobol")
    evidence = _parse_evidence(net, args.evidence)
    clash = [labels[t] for t in targets if t in evidence]
    if clash:
        raise ValueError(f"targets {clash} are fixed by the evidence")
    given = None
    if args.given is not None:
        given = _label_index(labels, args.given, "node")
        if given in targets:
            raise ValueError("--given node cannot also be a target")
        if given in evidence:
            raise ValueError("--given node cannot carry fixed evidence")
    outputs = []
    for t in targets:
        rows = [("baseline", query(net, t, evidence))]
        if given is not None:
            for level, name in enumerate(net.names_for(given)):
                rows.append(
                    (
                        f"{labels[given]}={name}",
                        query(net, t, {**evidence, given: level}),
                    )
                )
        table_path = out / f"query_{_safe_name(labels[t])}.csv"
        _write_table(table_path, ["evidence", *net.names_for(t)], rows)
        outputs.append(table_path)
        if args.svg:
            chart_path = out / f"query_{_safe_name(labels[t])}.svg"
            chart_path.write_text(
                svg_grouped_bars(
                    f"P({labels[t]})",
                    [name for name, _ in rows],
                    list(net.names_for(t)),
                    [[float(v) for v in vec] for _, vec in rows],
                )
            )
            outputs.append(chart_path)
    if args.scenarios is not None:
        spec = json.loads(Path(args.scenarios).read_text())
        if not isinstance(spec, dict):
            raise ValueError("scenario file must map names to evidence objects")
        inputs.append(Path(args.scenarios))
        resolved = {}
        for name, ev in spec.items():
            assignment = {}
            for k, v in ev.items():
                node = _label_index(labels, k, "node")
                assignment[node] = net.level_index(node, v)
            resolved[name] = assignment
        for t in targets:
            rows = [("baseline", query(net, t))]
            for name, ev in resolved.items():
                if t in ev:
                    raise ValueError(
                        f"scenario {name!r} fixes target {labels[t]!r}"
                    )
                rows.append((name, query(net, t, ev)))
            sc_path = out / f"scenario_{_safe_name(labels[t])}.csv"
            _write_table(sc_path, ["scenario", *net.names_for(t)], rows)
            outputs.append(sc_path)
            if args.svg:
                chart_path = out / f"scenario_{_safe_name(labels[t])}.svg"
                chart_path.write_text(
                    svg_grouped_bars(
                        f"P({labels[t]}) by scenario",
                        [name for name, _ in rows],
                        list(net.names_for(t)),
                        [[float(v) for v in vec] for _, vec in rows],
                    )
                )
                outputs.append(chart_path)
    if sobol_pairs:
        sobol_path = out / "sobol.csv"
        with sobol_path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["input", "output", "index_percent"])
            for a, b in sobol_pairs:
                s = sobol_first_order(net, a, b)
                w.writerow([labels[a], labels[b], f"{100.0 * s:.2f}"])
        outputs.append(sobol_path)
    _write_manifest(out, "infer", args, inputs, outputs)
    print(f"wrote {len(outputs)} file(s) to {out}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="latentbn",
        description=(
            "Structure learning for mixed data via a latent Gaussian "
            "copula, with benchmarking and discrete-network queries."
        ),
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command")

    sim = sub.add_parser("simulate", help="generate a synthetic mixed dataset")
    sim.add_argument("--p", type=int, required=True, help="variable count (even)")
    sim.add_argument("--n", type=int, required=True, help="sample size")
    sim.add_argument("--s", type=float, required=True, help="expected neighbors per node")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--out-dir", required=True)
    sim.set_defaults(func=cmd_simulate)

    learn = sub.add_parser("learn", help="learn a graph from a dataset")
    learn.add_argument("--data", required=True, help="dataset CSV")
    learn.add_argument("--types", default=None, help="types sidecar (default: data path with .types)")
    learn.add_argument("--method", required=True, choices=LEARN_METHODS)
    learn.add_argument("--alpha", type=float, default=0.01, help="CI test level")
    learn.add_argument("--b", type=int, default=200, help="bootstrap replicates (stable method)")
    learn.add_argument("--threshold", type=float, default=None,
                       help="edge inclusion threshold (stable method; default: data-driven)")
    learn.add_argument("--blacklist", default=None, help="CSV of forbidden from,to edges")
    learn.add_argument("--seed", type=int, default=0)
    learn.add_argument("--dot", action="store_true", help="also write graph.dot")
    learn.add_argument("--out-dir", required=True)
    learn.set_defaults(func=cmd_learn)

    bench = sub.add_parser("benchmark", help="run the simulation benchmark grid")
    bench.add_argument("--grid", required=True,
                       help="cells like 'p=10,n=500,s=2;p=10,n=5000,s=2'")
    bench.add_argument("--methods", required=True, help="comma-separated method names")
    bench.add_argument("--replicates", type=int, default=50)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--alpha", type=float, default=0.01)
    bench.add_argument("--stable-b", type=int, default=200)
    bench.add_argument("--threshold", type=float, default=None)
    bench.add_argument("--shd-mode", choices=("auto", "dag", "cpdag"), default="auto")
    bench.add_argument("--threads", type=int, default=None,
                       help="worker processes (default: LATENTBN_THREADS or 1)")
    bench.add_argument("--out-dir", required=True)
    bench.set_defaults(func=cmd_benchmark)

    fit = sub.add_parser("fit", help="fit CPTs on a fixed graph")
    fit.add_argument("--data", required=True)
    fit.add_argument("--types", default=None)
    fit.add_argument("--graph", required=True, help="graph JSON")
    fit.add_argument("--ranges", default="",
                     help="discretization ranges like 'score=1:6,other=0:4'")
    fit.add_argument("--prior-alpha", type=float, default=1.0)
    fit.add_argument("--out-dir", required=True)
    fit.set_defaults(func=cmd_fit)

    infer = sub.add_parser("infer", help="query a fitted network")
    infer.add_argument("--network", required=True, help="network JSON")
    infer.add_argument("--target", action="append", help="target node (repeatable)")
    infer.add_argument("--given", default=None,
                       help="sweep this node's levels as evidence rows")
    infer.add_argument("--evidence", action="append",
                       help="fixed evidence 'node=level' (repeatable)")
    infer.add_argument("--scenarios", default=None,
                       help="JSON file of named evidence profiles")
    infer.add_argument("--sobol", action="append",
                       help="sensitivity pair 'input:output' (repeatable)")
    infer.add_argument("--svg", action="store_true", help="also write bar charts")
    infer.add_argument("--out-dir", required=True)
    infer.set_defaults(func=cmd_infer)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "func"):
        parser.print_help()
        return 2
    try:
        return args.func(args)
    except LatentBnError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, KeyError, OSError) as exc:
        message = exc.args[0] if exc.args else exc
        print(f"error: {message}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
