"""Discrete Bayesian networks: CPT fitting, exact inference, sensitivity.

Continuous trait scores are rounded back onto ordinal scales, conditional
probability tables are fitted on a fixed DAG with Dirichlet smoothing,
and downstream questions (posterior updates, variance-based sensitivity,
joint scenarios) run through exact variable elimination.

Levels are handled as 0-based indices internally; a node's level names
(for display and file interchange) live in DiscreteBayesNet.level_names.
Ordinal data values 1..K map to indices 0..K-1, binary values are their
own indices.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .data import Column, MixedDataset
from .errors import ConstantOutputError, GraphFormatError
from .graphs import Dag, default_labels
from .rngs import rng_for

ROW_SUM_TOL = 1e-8

Evidence = dict[int, int]  # node index -> 0-based level index


@dataclass(frozen=True)
class DiscreteBayesNet:
    """A DAG with one conditional probability table per node.

    cpts[j] has one axis per parent of j in ascending node order followed
    by the axis for j itself, so the C-order flattening enumerates parent
    configurations with the first parent as the most significant digit.
    """

    dag: Dag
    cardinalities: tuple[int, ...]
    cpts: tuple[np.ndarray, ...]
    level_names: tuple[tuple[str, ...], ...] | None = None

    def __post_init__(self) -> None:
        cards = tuple(int(k) for k in self.cardinalities)
        if len(cards) != self.dag.node_count:
            raise ValueError("one cardinality per node required")
        if any(k < 2 for k in cards):
            raise ValueError("cardinalities must be at least 2")
        if len(self.cpts) != self.dag.node_count:
            raise ValueError("one CPT per node required")
        tables = []
        for j, raw in enumerate(self.cpts):
            t = np.array(raw, dtype=np.float64)
            pa = self.parents(j)
            want = tuple(cards[q] for q in pa) + (cards[j],)
            if t.shape != want:
                raise ValueError(
                    f"CPT for node {j} has shape {t.shape}, expected {want}"
                )
            if np.any(t < 0.0) or not np.all(np.isfinite(t)):
                raise ValueError(f"CPT for node {j} has invalid entries")
            if np.max(np.abs(t.sum(axis=-1) - 1.0)) > ROW_SUM_TOL:
                raise ValueError(f"CPT rows for node {j} must sum to 1")
            t.setflags(write=False)
            tables.append(t)
        if self.level_names is not None:
            names = tuple(tuple(str(x) for x in lv) for lv in self.level_names)
            if len(names) != self.dag.node_count:
                raise ValueError("one level-name list per node required")
            for j, lv in enumerate(names):
                if len(lv) != cards[j] or len(set(lv)) != len(lv):
                    raise ValueError(f"level names for node {j} are invalid")
            object.__setattr__(self, "level_names", names)
        object.__setattr__(self, "cardinalities", cards)
        object.__setattr__(self, "cpts", tuple(tables))

    def parents(self, j: int) -> tuple[int, ...]:
        return tuple(sorted(self.dag.parents(j)))

    @property
    def node_count(self) -> int:
        return self.dag.node_count

    def labels(self) -> tuple[str, ...]:
        return default_labels(self.dag)

    def names_for(self, j: int) -> tuple[str, ...]:
        if self.level_names is not None:
            return self.level_names[j]
        return tuple(str(k + 1) for k in range(self.cardinalities[j]))

    def level_index(self, j: int, name: str) -> int:
        names = self.names_for(j)
        try:
            return names.index(str(name))
        except ValueError:
            raise KeyError(
                f"node {self.labels()[j]!r} has no level {name!r}; "
                f"choices are {list(names)}"
            ) from None


def discretize_round(
    data: MixedDataset, ranges: dict[str, tuple[int, int]]
) -> MixedDataset:
    """Round continuous columns half away from zero onto ordinal scales.

    Every continuous column needs a [lo, hi] integer range; values round
    to the nearest integer (ties away from zero), clamp into the range,
    and shift onto 1..K with K = hi - lo + 1. Ordinal and binary columns
    pass through unchanged.
    """
    known = {lab for lab, c in zip(data.labels, data.columns) if c.kind == "continuous"}
    unknown = set(ranges) - known
    if unknown:
        raise ValueError(f"ranges given for non-continuous columns: {sorted(unknown)}")
    missing = known - set(ranges)
    if missing:
        raise ValueError(f"missing ranges for continuous columns: {sorted(missing)}")
    cols = []
    for lab, c in zip(data.labels, data.columns):
        if c.kind != "continuous":
            cols.append(c)
            continue
        lo, hi = (int(v) for v in ranges[lab])
        if hi <= lo:
            raise ValueError(f"range for {lab!r} must satisfy lo < hi")
        x = c.values
        rounded = np.where(x >= 0, np.floor(x + 0.5), np.ceil(x - 0.5))
        clamped = np.clip(rounded, lo, hi).astype(np.int64)
        cols.append(Column("ordinal", clamped - lo + 1, levels=hi - lo + 1))
    return MixedDataset(tuple(cols), data.labels)


def _level_indices(col: Column) -> tuple[np.ndarray, int]:
    if col.kind == "ordinal":
        return col.values - 1, col.levels
    if col.kind == "binary":
        return col.values, 2
    raise ValueError("CPT fitting needs ordinal or binary columns; "
                     "discretize continuous columns first")


def fit_cpts(
    dag: Dag, data: MixedDataset, prior_alpha: float = 1.0
) -> DiscreteBayesNet:
    """Dirichlet-smoothed CPTs on a fixed structure.

    P(k | config) = (count + alpha) / (rows in config + alpha * K), so
    unobserved parent configurations fall back to the uniform
    distribution and every entry stays positive.
    """
    if prior_alpha <= 0:
        raise ValueError("prior_alpha must be positive")
    if dag.node_count != data.p:
        raise ValueError("graph and dataset disagree on the variable count")
    if dag.node_labels is not None and tuple(dag.node_labels) != data.labels:
        raise ValueError("graph and dataset column labels disagree")
    indexed = [_level_indices(c) for c in data.columns]
    cards = tuple(k for _, k in indexed)
    cpts = []
    for j in range(data.p):
        pa = tuple(sorted(dag.parents(j)))
        shape = tuple(cards[q] for q in pa) + (cards[j],)
        counts = np.zeros(shape)
        coords = tuple(indexed[q][0] for q in pa) + (indexed[j][0],)
        np.add.at(counts, coords, 1.0)
        smoothed = counts + prior_alpha
        cpts.append(smoothed / smoothed.sum(axis=-1, keepdims=True))
    names = tuple(
        ("0", "1") if c.kind == "binary" else tuple(str(k + 1) for k in range(c.levels))
        for c in data.columns
    )
    labeled = Dag(dag.node_count, dag.edges, data.labels)
    return DiscreteBayesNet(labeled, cards, tuple(cpts), names)


@dataclass(frozen=True)
class _Factor:
    variables: tuple[int, ...]  # strictly increasing
    table: np.ndarray  # one axis per variable, in that order


def _cpt_factor(net: DiscreteBayesNet, j: int) -> _Factor:
    pa = net.parents(j)
    variables = tuple(sorted(pa + (j,)))
    # CPT axes are (sorted parents..., j); move j's axis into sorted place.
    return _Factor(variables, np.moveaxis(net.cpts[j], -1, variables.index(j)))


def _reduce(f: _Factor, evidence: Evidence) -> _Factor:
    table, kept = f.table, []
    for v in f.variables:
        axis = len(kept)
        if v in evidence:
            table = np.take(table, evidence[v], axis=axis)
        else:
            kept.append(v)
    return _Factor(tuple(kept), table)


def _product(factors: list[_Factor], cards) -> _Factor:
    union = tuple(sorted(set().union(*(f.variables for f in factors))))
    out = np.ones(tuple(cards[v] for v in union))
    for f in factors:
        shape = tuple(cards[v] if v in f.variables else 1 for v in union)
        out = out * f.table.reshape(shape)
    return _Factor(union, out)


def _sum_out(f: _Factor, v: int) -> _Factor:
    axis = f.variables.index(v)
    kept = tuple(x for x in f.variables if x != v)
    return _Factor(kept, f.table.sum(axis=axis))


def _min_fill_order(factors: list[_Factor], to_eliminate: set[int]) -> list[int]:
    adjacency: dict[int, set[int]] = {}
    for f in factors:
        for a, b in combinations(f.variables, 2):
            adjacency.setdefault(a, set()).add(b)
            adjacency.setdefault(b, set()).add(a)
        for v in f.variables:
            adjacency.setdefault(v, set())
    order = []
    remaining = set(to_eliminate)
    while remaining:
        best, best_fill = None, None
        for v in sorted(remaining):
            nbrs = adjacency.get(v, set()) & set(adjacency)
            fill = sum(
                1 for a, b in combinations(sorted(nbrs), 2)
                if b not in adjacency[a]
            )
            if best_fill is None or fill < best_fill:
                best, best_fill = v, fill
        nbrs = adjacency.pop(best)
        for a in nbrs:
            adjacency[a].discard(best)
        for a, b in combinations(sorted(nbrs), 2):
            if a in adjacency and b in adjacency:
                adjacency[a].add(b)
                adjacency[b].add(a)
        remaining.discard(best)
        order.append(best)
    return order


def _check_evidence(net: DiscreteBayesNet, evidence: Evidence) -> None:
    for v, level in evidence.items():
        if not 0 <= v < net.node_count:
            raise ValueError(f"evidence node {v} out of range")
        if not 0 <= level < net.cardinalities[v]:
            raise ValueError(
                f"evidence level {level} out of range for node {v} "
                f"(cardinality {net.cardinalities[v]})"
            )


def query(
    net: DiscreteBayesNet,
    target: int,
    evidence: Evidence | None = None,
    order: str = "min-fill",
) -> np.ndarray:
    """Exact posterior P(target | evidence) by variable elimination.

    Evidence maps node indices to 0-based level indices. order selects
    the elimination heuristic: "min-fill" (default) or
    "reverse-topological" (diagnostic cross-check; both are exact).
    """
    evidence = dict(evidence or {})
    _check_evidence(net, evidence)
    if target in evidence:
        raise ValueError("target cannot also be evidence")
    if not 0 <= target < net.node_count:
        raise ValueError(f"target node {target} out of range")
    # Constant factors (fully reduced CPTs) are kept: they carry the
    # evidence likelihood, including the zero that flags impossible
    # evidence.
    factors = [
        _reduce(_cpt_factor(net, j), evidence) for j in range(net.node_count)
    ]
    hidden = set(range(net.node_count)) - set(evidence) - {target}
    if order == "min-fill":
        schedule = _min_fill_order(factors, hidden)
    elif order == "reverse-topological":
        schedule = [v for v in reversed(net.dag.topological_order()) if v in hidden]
    else:
        raise ValueError(f"unknown elimination order {order!r}")
    cards = net.cardinalities
    for v in schedule:
        bucket = [f for f in factors if v in f.variables]
        if not bucket:
            continue
        factors = [f for f in factors if v not in f.variables]
        factors.append(_sum_out(_product(bucket, cards), v))
    final = _product(factors, cards) if factors else _Factor((), np.array(1.0))
    if final.variables != (target,):
        raise AssertionError(f"elimination left scope {final.variables}")
    z = float(final.table.sum())
    if z <= 0.0:
        raise ValueError("evidence has zero probability under the network")
    return final.table / z


def scenario(
    net: DiscreteBayesNet, targets, evidence: Evidence | None = None
) -> dict[int, np.ndarray]:
    """Posterior of each target under one shared evidence assignment."""
    targets = list(targets)
    evidence = dict(evidence or {})
    clash = [t for t in targets if t in evidence]
    if clash:
        raise ValueError(f"targets {clash} are fixed by the evidence")
    return {t: query(net, t, evidence) for t in targets}


def sobol_first_order(
    net: DiscreteBayesNet,
    input_node: int,
    output_node: int,
    encoding: np.ndarray | None = None,
) -> float:
    """First-order sensitivity Var(E[Y | X]) / Var(Y) of output to input.

    Y is the numeric encoding of the output's levels (default: the level
    index 1..K). Exact: uses the input's marginal and one conditional
    query per input level. Inputs may be mutually dependent under the
    network, so indices over several inputs need not sum to 1.
    """
    if input_node == output_node:
        raise ValueError("input and output must differ")
    k_out = net.cardinalities[output_node]
    enc = (
        np.arange(1, k_out + 1, dtype=np.float64)
        if encoding is None
        else np.asarray(encoding, dtype=np.float64)
    )
    if enc.shape != (k_out,):
        raise ValueError("encoding must give one value per output level")
    p_out = query(net, output_node)
    mean_y = float(p_out @ enc)
    var_y = float(p_out @ (enc - mean_y) ** 2)
    if var_y <= 0.0:
        raise ConstantOutputError(
            "output has zero variance; sensitivity is undefined"
        )
    p_in = query(net, input_node)
    explained = 0.0
    for k in range(net.cardinalities[input_node]):
        cond = query(net, output_node, {input_node: k})
        explained += float(p_in[k]) * (float(cond @ enc) - mean_y) ** 2
    return explained / var_y


def sample_dataset(net: DiscreteBayesNet, n: int, seed: int) -> MixedDataset:
    """n ancestral draws from the network as an all-ordinal dataset."""
    if n < 1:
        raise ValueError("n must be positive")
    rng = rng_for(seed)
    levels = np.zeros((n, net.node_count), dtype=np.int64)
    for j in net.dag.topological_order():
        pa = net.parents(j)
        if pa:
            rows = net.cpts[j][tuple(levels[:, q] for q in pa)]
        else:
            rows = np.broadcast_to(net.cpts[j], (n, net.cardinalities[j]))
        cum = np.cumsum(rows, axis=1)
        u = rng.uniform(size=(n, 1))
        levels[:, j] = np.minimum(
            (u >= cum).sum(axis=1), net.cardinalities[j] - 1
        )
    cols = tuple(
        Column("ordinal", levels[:, j] + 1, levels=net.cardinalities[j])
        for j in range(net.node_count)
    )
    return MixedDataset(cols, net.labels())


def network_to_json(net: DiscreteBayesNet) -> str:
    """Portable network serialization.

    CPT tables are flattened row-major over parent configurations in
    mixed-radix order with the first listed parent as the most
    significant digit and the node's own level innermost.
    """
    labels = net.labels()
    nodes = [
        {"label": labels[j], "levels": list(net.names_for(j))}
        for j in range(net.node_count)
    ]
    edges = sorted(
        ({"from": labels[i], "to": labels[j]} for i, j in net.dag.edges),
        key=lambda e: (e["from"], e["to"]),
    )
    cpts = [
        {
            "node": labels[j],
            "parents": [labels[q] for q in net.parents(j)],
            "table": [float(x) for x in net.cpts[j].ravel()],
        }
        for j in range(net.node_count)
    ]
    return json.dumps(
        {"nodes": nodes, "edges": edges, "cpts": cpts}, indent=2
    ) + "\n"


def network_from_json(text: str) -> DiscreteBayesNet:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"network file is not valid JSON: {exc}") from None
    try:
        node_specs = payload["nodes"]
        edge_specs = payload["edges"]
        cpt_specs = payload["cpts"]
    except (TypeError, KeyError):
        raise GraphFormatError(
            "network file needs 'nodes', 'edges' and 'cpts' sections"
        ) from None
    labels = [str(s["label"]) for s in node_specs]
    if len(set(labels)) != len(labels):
        raise GraphFormatError("node labels must be unique")
    index = {lab: j for j, lab in enumerate(labels)}
    names = tuple(tuple(str(x) for x in s["levels"]) for s in node_specs)
    cards = tuple(len(lv) for lv in names)

    def resolve(label) -> int:
        try:
            return index[str(label)]
        except KeyError:
            raise GraphFormatError(f"unknown node {label!r}") from None

    edges = frozenset(
        (resolve(e["from"]), resolve(e["to"])) for e in edge_specs
    )
    dag = Dag(len(labels), edges, tuple(labels))
    tables: dict[int, np.ndarray] = {}
    for spec in cpt_specs:
        j = resolve(spec["node"])
        if j in tables:
            raise GraphFormatError(f"duplicate CPT for {labels[j]!r}")
        file_parents = [resolve(q) for q in spec["parents"]]
        if sorted(file_parents) != sorted(dag.parents(j)):
            raise GraphFormatError(
                f"CPT parents for {labels[j]!r} disagree with the edges"
            )
        shape = tuple(cards[q] for q in file_parents) + (cards[j],)
        flat = np.asarray(spec["table"], dtype=np.float64)
        if flat.size != int(np.prod(shape)):
            raise GraphFormatError(
                f"CPT for {labels[j]!r} has {flat.size} entries, "
                f"expected {int(np.prod(shape))}"
            )
        table = flat.reshape(shape)
        # Reorder parent axes into ascending node order.
        perm = sorted(range(len(file_parents)), key=lambda a: file_parents[a])
        tables[j] = np.transpose(table, tuple(perm) + (len(file_parents),))
    missing = [labels[j] for j in range(len(labels)) if j not in tables]
    if missing:
        raise GraphFormatError(f"missing CPTs for {missing}")
    try:
        return DiscreteBayesNet(
            dag, cards, tuple(tables[j] for j in range(len(labels))), names
        )
    except ValueError as exc:
        raise GraphFormatError(str(exc)) from None
