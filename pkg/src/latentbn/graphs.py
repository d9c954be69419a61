"""Directed and partially directed graphs over integer nodes.

Nodes are always 0..node_count-1; optional labels ride along for I/O. The
module provides d-separation, conversion of a DAG to its completed partially
directed form (v-structures plus Meek rules R1-R4), structural Hamming
distance in both dag and cpdag conventions, skeleton-level sensitivity and
specificity, and bit-exact JSON/DOT serialization.
"""

from __future__ import annotations

import json
import re
from collections import deque
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable

from .errors import GraphFormatError

Edge = tuple[int, int]


def _normalize_edges(edges: Iterable[Edge]) -> frozenset[Edge]:
    return frozenset((int(i), int(j)) for i, j in edges)


def _check_nodes(node_count: int, edges: Iterable[Edge]) -> None:
    if node_count < 0:
        raise ValueError("node_count must be nonnegative")
    for i, j in edges:
        if i == j:
            raise ValueError(f"self loop at node {i}")
        if not (0 <= i < node_count and 0 <= j < node_count):
            raise ValueError(f"edge ({i}, {j}) out of range for {node_count} nodes")


def is_acyclic(node_count: int, edges: Iterable[Edge]) -> bool:
    """True iff the directed edge set has no cycle (Kahn peeling)."""
    children: dict[int, list[int]] = {i: [] for i in range(node_count)}
    indeg = [0] * node_count
    for i, j in edges:
        children[i].append(j)
        indeg[j] += 1
    ready = deque(i for i in range(node_count) if indeg[i] == 0)
    seen = 0
    while ready:
        u = ready.popleft()
        seen += 1
        for v in children[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                ready.append(v)
    return seen == node_count


def topological_order(node_count: int, edges: Iterable[Edge]) -> list[int]:
    """Topological order, smallest node index first among the ready set."""
    children: dict[int, list[int]] = {i: [] for i in range(node_count)}
    indeg = [0] * node_count
    for i, j in edges:
        children[i].append(j)
        indeg[j] += 1
    import heapq

    ready = [i for i in range(node_count) if indeg[i] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        u = heapq.heappop(ready)
        order.append(u)
        for v in children[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                heapq.heappush(ready, v)
    if len(order) != node_count:
        raise ValueError("graph contains a cycle")
    return order


@dataclass(frozen=True)
class Dag:
    """Directed acyclic graph with edges (i, j) meaning i -> j."""

    node_count: int
    edges: frozenset[Edge]
    node_labels: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "edges", _normalize_edges(self.edges))
        _check_nodes(self.node_count, self.edges)
        if self.node_labels is not None:
            object.__setattr__(self, "node_labels", tuple(self.node_labels))
            if len(self.node_labels) != self.node_count:
                raise ValueError("node_labels length must equal node_count")
        if not is_acyclic(self.node_count, self.edges):
            raise ValueError("edge set contains a cycle")

    def parents(self, j: int) -> set[int]:
        return {i for i, k in self.edges if k == j}

    def children(self, i: int) -> set[int]:
        return {k for h, k in self.edges if h == i}

    def skeleton(self) -> frozenset[Edge]:
        """Unordered adjacency pairs, stored with the smaller index first."""
        return frozenset((min(i, j), max(i, j)) for i, j in self.edges)

    def topological_order(self) -> list[int]:
        return topological_order(self.node_count, self.edges)


@dataclass(frozen=True)
class Pdag:
    """Partially directed graph: directed (i, j) edges plus undirected pairs."""

    node_count: int
    directed_edges: frozenset[Edge]
    undirected_edges: frozenset[Edge]
    node_labels: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "directed_edges", _normalize_edges(self.directed_edges))
        und = frozenset(
            (min(int(i), int(j)), max(int(i), int(j))) for i, j in self.undirected_edges
        )
        object.__setattr__(self, "undirected_edges", und)
        _check_nodes(self.node_count, self.directed_edges)
        _check_nodes(self.node_count, self.undirected_edges)
        if self.node_labels is not None:
            object.__setattr__(self, "node_labels", tuple(self.node_labels))
            if len(self.node_labels) != self.node_count:
                raise ValueError("node_labels length must equal node_count")
        dir_pairs = {(min(i, j), max(i, j)) for i, j in self.directed_edges}
        if len(dir_pairs) != len(self.directed_edges):
            raise ValueError("a pair is directed in both orientations")
        if dir_pairs & self.undirected_edges:
            raise ValueError("a pair is both directed and undirected")

    def skeleton(self) -> frozenset[Edge]:
        dir_pairs = frozenset((min(i, j), max(i, j)) for i, j in self.directed_edges)
        return dir_pairs | self.undirected_edges


@dataclass(frozen=True)
class EdgeList:
    """A set of forbidden ordered edges (i, j), used as a search blacklist."""

    forbidden: frozenset[Edge]

    def __post_init__(self) -> None:
        object.__setattr__(self, "forbidden", _normalize_edges(self.forbidden))
        for i, j in self.forbidden:
            if i == j:
                raise ValueError(f"self loop at node {i} in blacklist")

    def __contains__(self, edge: Edge) -> bool:
        return (int(edge[0]), int(edge[1])) in self.forbidden


@dataclass(frozen=True)
class StructuralMetrics:
    shd: int
    sensitivity: float
    specificity: float


def d_separated(g: Dag, i: int, j: int, s: Iterable[int] = ()) -> bool:
    """True iff every path between i and j is blocked given the set s.

    Uses the moralized ancestral subgraph: restrict to ancestors of
    {i, j} | s, marry co-parents, drop s, and test reachability. This is
    equivalent to checking the chain/fork/collider blocking rules on every
    path, with a collider left open only when it or one of its descendants
    is conditioned on.
    """
    s = {int(v) for v in s}
    if i == j:
        raise ValueError("i and j must differ")
    if i in s or j in s:
        raise ValueError("i and j must not be in the conditioning set")

    parent_map: dict[int, set[int]] = {v: set() for v in range(g.node_count)}
    for a, b in g.edges:
        parent_map[b].add(a)

    ancestral = set()
    stack = [i, j, *s]
    while stack:
        v = stack.pop()
        if v in ancestral:
            continue
        ancestral.add(v)
        stack.extend(parent_map[v])

    moral: dict[int, set[int]] = {v: set() for v in ancestral}
    for b in ancestral:
        pa = parent_map[b] & ancestral
        for a in pa:
            moral[a].add(b)
            moral[b].add(a)
        for u, v in combinations(sorted(pa), 2):
            moral[u].add(v)
            moral[v].add(u)

    visited = {i}
    queue = deque([i])
    while queue:
        u = queue.popleft()
        for v in moral[u]:
            if v in s or v in visited:
                continue
            if v == j:
                return False
            visited.add(v)
            queue.append(v)
    return True


def _meek_closure(
    node_count: int,
    pairs: set[Edge],
    oriented: dict[Edge, Edge],
) -> dict[Edge, Edge]:
    """Propagate Meek rules R1-R4 to a fixpoint.

    ``pairs`` holds all skeleton adjacencies (i < j); ``oriented`` maps a
    pair to its (from, to) direction. Undirected pairs are visited in sorted
    order and both candidate directions are tried deterministically, so the
    closure is reproducible.
    """
    adj: dict[int, set[int]] = {v: set() for v in range(node_count)}
    for a, b in pairs:
        adj[a].add(b)
        adj[b].add(a)
    directed = {d for d in oriented.values()}

    def adjacent(x: int, y: int) -> bool:
        return y in adj[x]

    def undirected(x: int, y: int) -> bool:
        key = (min(x, y), max(x, y))
        return key in pairs and key not in oriented

    def rule_fires(x: int, y: int) -> bool:
        # R1: c -> x, x - y, c and y nonadjacent.
        for c in adj[x]:
            if (c, x) in directed and not adjacent(c, y) and c != y:
                return True
        # R2: x -> c -> y with x - y.
        for c in adj[x]:
            if (x, c) in directed and (c, y) in directed:
                return True
        # R3: x - c -> y and x - d -> y with c, d nonadjacent.
        spokes = [c for c in adj[x] if undirected(x, c) and (c, y) in directed]
        for c, d in combinations(sorted(spokes), 2):
            if not adjacent(c, d):
                return True
        # R4: c -> d -> y with c and y nonadjacent, x adjacent to both c and d.
        for d in adj[x]:
            if (d, y) not in directed:
                continue
            for c in adj[x]:
                if (c, d) in directed and not adjacent(c, y) and c != y:
                    return True
        return False

    changed = True
    while changed:
        changed = False
        for a, b in sorted(pairs):
            if (a, b) in oriented:
                continue
            for x, y in ((a, b), (b, a)):
                if rule_fires(x, y):
                    oriented[(a, b)] = (x, y)
                    directed.add((x, y))
                    changed = True
                    break
    return oriented


def orient_with_meek(
    node_count: int,
    skeleton_pairs: Iterable[Edge],
    directed: Iterable[Edge],
    node_labels: tuple[str, ...] | None = None,
) -> Pdag:
    """Complete a partial orientation of a skeleton under Meek rules."""
    pairs = {(min(i, j), max(i, j)) for i, j in skeleton_pairs}
    oriented: dict[Edge, Edge] = {}
    for i, j in directed:
        key = (min(i, j), max(i, j))
        if key not in pairs:
            raise ValueError(f"directed edge ({i}, {j}) not in skeleton")
        oriented[key] = (i, j)
    oriented = _meek_closure(node_count, pairs, oriented)
    return Pdag(
        node_count=node_count,
        directed_edges=frozenset(oriented.values()),
        undirected_edges=frozenset(k for k in pairs if k not in oriented),
        node_labels=node_labels,
    )


def dag_to_cpdag(g: Dag) -> Pdag:
    """Completed partially directed graph of g's Markov equivalence class.

    Edges taking part in a v-structure i -> k <- j (i, j nonadjacent) stay
    directed; Meek rules R1-R4 then run to a fixpoint and every remaining
    edge is reversible, hence undirected.
    """
    pairs = set(g.skeleton())
    oriented: dict[Edge, Edge] = {}
    parent_map = {v: sorted(g.parents(v)) for v in range(g.node_count)}
    for k in range(g.node_count):
        for i, j in combinations(parent_map[k], 2):
            if (min(i, j), max(i, j)) not in pairs:
                oriented[(min(i, k), max(i, k))] = (i, k)
                oriented[(min(j, k), max(j, k))] = (j, k)
    oriented = _meek_closure(g.node_count, pairs, oriented)
    return Pdag(
        node_count=g.node_count,
        directed_edges=frozenset(oriented.values()),
        undirected_edges=frozenset(k for k in pairs if k not in oriented),
        node_labels=g.node_labels,
    )


def _pair_states(graph: Dag | Pdag) -> dict[Edge, str]:
    """Map each unordered adjacent pair to 'fwd', 'rev', or 'und'."""
    states: dict[Edge, str] = {}
    if isinstance(graph, Dag):
        for i, j in graph.edges:
            states[(min(i, j), max(i, j))] = "fwd" if i < j else "rev"
        return states
    for i, j in graph.directed_edges:
        states[(min(i, j), max(i, j))] = "fwd" if i < j else "rev"
    for pair in graph.undirected_edges:
        states[pair] = "und"
    return states


def shd(estimated: Dag | Pdag, truth: Dag | Pdag, mode: str = "dag") -> int:
    """Structural Hamming distance between an estimate and the truth.

    mode="dag" compares directed adjacency states: a missing or extra
    adjacency costs 1 and a reversed edge costs 1. mode="cpdag" converts
    any Dag argument to its completed partially directed form first
    (a Pdag argument is used as-is) and counts unordered pairs whose
    none/forward/reverse/undirected state differs.
    """
    if estimated.node_count != truth.node_count:
        raise ValueError("graphs must share the node count")
    if mode == "dag":
        if not isinstance(estimated, Dag) or not isinstance(truth, Dag):
            raise ValueError("dag mode requires two Dag arguments")
        a, b = _pair_states(estimated), _pair_states(truth)
    elif mode == "cpdag":
        est = dag_to_cpdag(estimated) if isinstance(estimated, Dag) else estimated
        tru = dag_to_cpdag(truth) if isinstance(truth, Dag) else truth
        a, b = _pair_states(est), _pair_states(tru)
    else:
        raise ValueError(f"unknown shd mode {mode!r}")
    return sum(1 for pair in set(a) | set(b) if a.get(pair) != b.get(pair))


def sensitivity_specificity(
    estimated: Dag | Pdag,
    truth: Dag | Pdag,
    shd_mode: str | None = None,
) -> StructuralMetrics:
    """Skeleton-level confusion metrics over the p(p-1)/2 unordered pairs.

    Orientation is deliberately ignored so that constraint-based outputs,
    which may leave edges undirected, are comparable with DAG outputs. A
    vacuous denominator (no true adjacencies, or no true absences) yields
    1.0. The bundled shd uses cpdag mode whenever the estimate is a Pdag,
    unless overridden.
    """
    if estimated.node_count != truth.node_count:
        raise ValueError("graphs must share the node count")
    p = truth.node_count
    est = estimated.skeleton()
    tru = truth.skeleton()
    tp = len(est & tru)
    fp = len(est - tru)
    fn = len(tru - est)
    tn = p * (p - 1) // 2 - tp - fp - fn
    sen = tp / (tp + fn) if tp + fn > 0 else 1.0
    spe = tn / (tn + fp) if tn + fp > 0 else 1.0
    if shd_mode is None:
        shd_mode = "cpdag" if isinstance(estimated, Pdag) else "dag"
    return StructuralMetrics(
        shd=shd(estimated, truth, mode=shd_mode), sensitivity=sen, specificity=spe
    )


def default_labels(graph: Dag | Pdag) -> tuple[str, ...]:
    labels = getattr(graph, "node_labels", None)
    if labels is not None:
        return tuple(labels)
    return tuple(f"X{i}" for i in range(graph.node_count))


def _sorted_edge_docs(graph: Dag | Pdag) -> list[dict]:
    rows = []
    if isinstance(graph, Dag):
        for i, j in graph.edges:
            rows.append({"from": i, "to": j, "directed": True})
    else:
        for i, j in graph.directed_edges:
            rows.append({"from": i, "to": j, "directed": True})
        for i, j in graph.undirected_edges:
            rows.append({"from": i, "to": j, "directed": False})
    rows.sort(key=lambda r: (r["from"], r["to"], not r["directed"]))
    return rows


def graph_to_json(graph: Dag | Pdag) -> str:
    doc = {"nodes": list(default_labels(graph)), "edges": _sorted_edge_docs(graph)}
    return json.dumps(doc, indent=2) + "\n"


def graph_from_json(text: str) -> Dag | Pdag:
    try:
        doc = json.loads(text)
        nodes = doc["nodes"]
        edges = doc["edges"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise GraphFormatError(f"malformed graph document: {exc}") from exc
    labels = tuple(str(x) for x in nodes)
    p = len(labels)
    directed, undirected = [], []
    for row in edges:
        try:
            i, j, is_dir = int(row["from"]), int(row["to"]), bool(row["directed"])
        except (KeyError, TypeError, ValueError) as exc:
            raise GraphFormatError(f"malformed edge entry {row!r}") from exc
        (directed if is_dir else undirected).append((i, j))
    try:
        if undirected:
            return Pdag(p, frozenset(directed), frozenset(undirected), labels)
        return Dag(p, frozenset(directed), labels)
    except ValueError as exc:
        raise GraphFormatError(str(exc)) from exc


def graph_to_dot(graph: Dag | Pdag) -> str:
    """DOT text with 'i -> j' directed and 'i -- j' undirected edges.

    Node indices are the identifiers; every node is listed so isolated
    nodes survive a round trip. The emission order is canonical, so
    parse/emit is bit-exact.
    """
    lines = ["digraph G {"]
    lines.extend(f"  {i};" for i in range(graph.node_count))
    for row in _sorted_edge_docs(graph):
        op = "->" if row["directed"] else "--"
        lines.append(f"  {row['from']} {op} {row['to']};")
    lines.append("}")
    return "\n".join(lines) + "\n"


_DOT_NODE = re.compile(r"^(\d+);$")
_DOT_EDGE = re.compile(r"^(\d+) (->|--) (\d+);$")


def graph_from_dot(text: str) -> Dag | Pdag:
    body = [ln.strip() for ln in text.strip().splitlines()]
    if not body or not body[0].startswith("digraph") or body[-1] != "}":
        raise GraphFormatError("expected a 'digraph { ... }' document")
    nodes: set[int] = set()
    directed, undirected = [], []
    for ln in body[1:-1]:
        m = _DOT_NODE.match(ln)
        if m:
            nodes.add(int(m.group(1)))
            continue
        m = _DOT_EDGE.match(ln)
        if not m:
            raise GraphFormatError(f"unparseable DOT line: {ln!r}")
        i, op, j = int(m.group(1)), m.group(2), int(m.group(3))
        nodes.update((i, j))
        (directed if op == "->" else undirected).append((i, j))
    p = max(nodes) + 1 if nodes else 0
    try:
        if undirected:
            return Pdag(p, frozenset(directed), frozenset(undirected))
        return Dag(p, frozenset(directed))
    except ValueError as exc:
        raise GraphFormatError(str(exc)) from exc
