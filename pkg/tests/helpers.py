"""Shared generators and brute-force oracles used across the test suite."""

from __future__ import annotations

from itertools import combinations, product

import numpy as np

from latentbn.graphs import Dag, is_acyclic


def enumerate_dags(p: int) -> list[Dag]:
    """Every DAG on p labeled nodes, by assigning each pair a state."""
    pairs = list(combinations(range(p), 2))
    dags = []
    for states in product((0, 1, 2), repeat=len(pairs)):
        edges = []
        for (i, j), state in zip(pairs, states):
            if state == 1:
                edges.append((i, j))
            elif state == 2:
                edges.append((j, i))
        if is_acyclic(p, edges):
            dags.append(Dag(p, frozenset(edges)))
    return dags


def random_dag(rng: np.random.Generator, p: int, edge_prob: float) -> Dag:
    """Random DAG via a random topological order."""
    order = rng.permutation(p)
    edges = []
    for a in range(p):
        for b in range(a + 1, p):
            if rng.random() < edge_prob:
                edges.append((int(order[a]), int(order[b])))
    return Dag(p, frozenset(edges))


def random_weighted_dag(
    rng: np.random.Generator,
    p: int,
    edge_prob: float,
    wmin: float = 0.4,
    wmax: float = 1.0,
) -> tuple[Dag, np.ndarray]:
    """Random DAG plus coefficient matrix B with B[child, parent] = weight."""
    g = random_dag(rng, p, edge_prob)
    b = np.zeros((p, p))
    for i, j in sorted(g.edges):
        w = rng.uniform(wmin, wmax)
        if rng.random() < 0.5:
            w = -w
        b[j, i] = w
    return g, b


def exact_covariance(b: np.ndarray) -> np.ndarray:
    """Covariance of Z solving Z = B Z + eps with standard normal noise."""
    p = b.shape[0]
    m = np.linalg.inv(np.eye(p) - b)
    return m @ m.T


def partial_correlation_oracle(
    sigma: np.ndarray, i: int, j: int, s: tuple[int, ...]
) -> float:
    """Partial correlation from the inverse of the covariance submatrix."""
    idx = [i, j, *s]
    omega = np.linalg.inv(sigma[np.ix_(idx, idx)])
    return float(-omega[0, 1] / np.sqrt(omega[0, 0] * omega[1, 1]))


def covered_edges(g: Dag) -> list[tuple[int, int]]:
    """Edges x -> y with pa(y) = pa(x) | {x}; reversing one preserves the class."""
    out = []
    for x, y in sorted(g.edges):
        if g.parents(y) == g.parents(x) | {x}:
            out.append((x, y))
    return out


def kendall_tau_bruteforce(x: np.ndarray, y: np.ndarray) -> float:
    """Tie-corrected tau-b by explicit O(n^2) pair counting."""
    n = len(x)
    concordant = discordant = 0
    tied_x = tied_y = 0  # pairs tied in x (resp. y), pairs tied in both count in each
    for a in range(n):
        for b in range(a + 1, n):
            dx = np.sign(x[a] - x[b])
            dy = np.sign(y[a] - y[b])
            if dx == 0:
                tied_x += 1
            if dy == 0:
                tied_y += 1
            if dx == 0 or dy == 0:
                continue
            if dx == dy:
                concordant += 1
            else:
                discordant += 1
    n0 = n * (n - 1) / 2
    denom = np.sqrt((n0 - tied_x) * (n0 - tied_y))
    if denom == 0:
        raise ZeroDivisionError("constant column")
    return float((concordant - discordant) / denom)


def random_discrete_net(rng: np.random.Generator, max_nodes: int = 6,
                        max_levels: int = 6):
    """Random small network with Dirichlet-1 CPTs built from random counts."""
    from latentbn.discrete import DiscreteBayesNet

    p = int(rng.integers(2, max_nodes + 1))
    dag = random_dag(rng, p, edge_prob=0.5)
    cards = tuple(int(k) for k in rng.integers(2, max_levels + 1, size=p))
    cpts = []
    for j in range(p):
        shape = tuple(cards[q] for q in sorted(dag.parents(j))) + (cards[j],)
        counts = rng.integers(0, 20, size=shape).astype(np.float64)
        smoothed = counts + 1.0
        cpts.append(smoothed / smoothed.sum(axis=-1, keepdims=True))
    return DiscreteBayesNet(dag, cards, tuple(cpts))


def joint_distribution(net) -> np.ndarray:
    """Full joint table by explicit per-assignment CPT products."""
    joint = np.zeros(net.cardinalities)
    for assignment in np.ndindex(*net.cardinalities):
        prob = 1.0
        for j in range(net.node_count):
            idx = tuple(assignment[q] for q in net.parents(j)) + (assignment[j],)
            prob *= float(net.cpts[j][idx])
        joint[assignment] = prob
    return joint


def posterior_bruteforce(
    net, target: int, evidence: dict[int, int], joint: np.ndarray | None = None
) -> np.ndarray:
    """P(target | evidence) by summing the enumerated joint."""
    if joint is None:
        joint = joint_distribution(net)
    idx = tuple(evidence.get(v, slice(None)) for v in range(net.node_count))
    sub = joint[idx]
    remaining = [v for v in range(net.node_count) if v not in evidence]
    others = tuple(a for a, v in enumerate(remaining) if v != target)
    vec = sub.sum(axis=others)
    return vec / vec.sum()


def sobol_bruteforce(
    net,
    x: int,
    y: int,
    enc: np.ndarray | None = None,
    joint: np.ndarray | None = None,
) -> float:
    """Var(E[Y|X]) / Var(Y) straight from the enumerated joint table."""
    if joint is None:
        joint = joint_distribution(net)
    nc = net.node_count
    if enc is None:
        enc = np.arange(1, net.cardinalities[y] + 1, dtype=np.float64)
    p_xy = joint.sum(axis=tuple(a for a in range(nc) if a not in (x, y)))
    if x > y:
        p_xy = p_xy.T
    p_x = p_xy.sum(axis=1)
    p_y = p_xy.sum(axis=0)
    mean_y = float(p_y @ enc)
    var_y = float(p_y @ (enc - mean_y) ** 2)
    cond_means = (p_xy @ enc) / p_x
    return float(p_x @ (cond_means - mean_y) ** 2) / var_y
