"""Independent reference implementations used to check the package.

Nothing here imports the code under test except the graph data model.
"""
from __future__ import annotations

import itertools

import numpy as np

from vgrank.graph import EDGE_TYPES, LABELS, Edge, Node, VerificationGraph


def random_graph(rng: np.random.Generator, max_nodes: int = 50, n_labels: int = 6,
                 edge_types=EDGE_TYPES) -> VerificationGraph:
    """Statement roots with random SD subtrees plus random root-to-root edges
    of the non-SD kinds in ``edge_types``.

    A small label alphabet keeps label collisions (and so non-zero kernels)
    likely.
    """
    alphabet = LABELS[:n_labels]
    n = int(rng.integers(1, max_nodes + 1))
    depth = [0]
    parent = [None]
    for _ in range(1, n):
        if rng.random() < 0.35:
            depth.append(0)
            parent.append(None)
        else:
            p = int(rng.integers(0, len(depth)))
            depth.append(depth[p] + 1)
            parent.append(p)
    nodes = [Node(i, str(rng.choice(alphabet)), depth[i]) for i in range(n)]
    edges = [(p, c, "SD", True) for c, p in enumerate(parent) if p is not None]
    roots = [i for i in range(n) if depth[i] == 0]
    other = [t for t in edge_types if t != "SD"]
    if other:
        for _ in range(int(rng.integers(0, 2 * len(roots) + 1))):
            s, t = (int(x) for x in rng.choice(roots, size=2))
            kind = str(rng.choice(other))
            cond = bool(rng.random() < 0.5) if kind == "CD" else True
            edges.append((s, t, kind, cond))
    order = rng.permutation(len(edges))
    return VerificationGraph(
        tuple(nodes),
        tuple(Edge(k, *edges[i]) for k, i in enumerate(order)),
    )


def permute_graph(g: VerificationGraph, perm) -> VerificationGraph:
    """Same graph with node ``i`` renamed ``perm[i]`` and edges reversed in id order."""
    nodes = tuple(Node(int(perm[n.id]), n.label, n.depth) for n in g.nodes)
    m = len(g.edges)
    edges = tuple(Edge(m - 1 - e.id, int(perm[e.src]), int(perm[e.dst]), e.type, e.cond)
                  for e in g.edges)
    return VerificationGraph(nodes, edges)


def refine(graphs, kinds, rounds):
    """Label history per graph using nested tuples as signatures.

    Labels are interned into one shared dictionary so they are comparable
    across graphs.
    """
    ids: dict = {}

    def intern(sig):
        return ids.setdefault(sig, len(ids))

    histories = []
    for g in graphs:
        labels = [intern(("orig", lab)) for lab in g.labels]
        history = [labels]
        for _ in range(rounds):
            nbrs = [[] for _ in labels]
            for e in g.edges:
                if e.type in kinds:
                    nbrs[e.src].append((labels[e.dst], e.type, e.cond))
            labels = [intern((labels[v], tuple(sorted(nbrs[v])))) for v in range(len(labels))]
            history.append(labels)
        histories.append(history)
    return histories


def naive_kernel(g1, g2, kinds, depth, rounds) -> int:
    """Per-round double sum over node pairs of the Dirac kernel on labels."""
    h1, h2 = refine([g1, g2], set(kinds), rounds)
    d1, d2 = g1.depths, g2.depths
    total = 0
    for lab1, lab2 in zip(h1, h2):
        for a in range(len(g1)):
            if d1[a] > depth:
                continue
            for b in range(len(g2)):
                if d2[b] <= depth and lab1[a] == lab2[b]:
                    total += 1
    return total


def box_qp(K, y, C):
    """Exact minimum of ``1/2 a'Qa - sum a`` s.t. ``y'a = 0``, ``0 <= a <= C``.

    Enumerates every assignment of each variable to {0, C, free}; for the free
    ones the KKT system with the equality multiplier is solved directly.
    Returns ``(objective, alpha)``.
    """
    K = np.asarray(K, float)
    y = np.asarray(y, float)
    n = len(y)
    Q = np.outer(y, y) * K
    best = (np.inf, None)
    for state in itertools.product((0, 1, 2), repeat=n):
        alpha = np.array([C if s == 1 else 0.0 for s in state])
        free = [i for i, s in enumerate(state) if s == 2]
        if free:
            f = np.array(free)
            fixed = alpha.copy()
            rhs = np.ones(len(f)) - Q[np.ix_(f, range(n))] @ fixed
            A = np.zeros((len(f) + 1, len(f) + 1))
            A[:-1, :-1] = Q[np.ix_(f, f)]
            A[:-1, -1] = -y[f]
            A[-1, :-1] = y[f]
            b = np.append(rhs, -y @ fixed)
            sol, *_ = np.linalg.lstsq(A, b, rcond=None)
            if not np.allclose(A @ sol, b, atol=1e-9):
                continue
            alpha[f] = sol[:-1]
        if abs(y @ alpha) > 1e-9 or alpha.min() < -1e-9 or alpha.max() > C + 1e-9:
            continue
        obj = 0.5 * alpha @ Q @ alpha - alpha.sum()
        if obj < best[0]:
            best = (obj, alpha)
    return best


def spearman_ref(p, q) -> float:
    """Pearson correlation of the position vectors (equal to Spearman for permutations)."""
    p = np.asarray(p, float)
    q = np.asarray(q, float)
    return float(np.corrcoef(p, q)[0, 1])


def best_consensus(Y):
    """All rankings maximising the summed Spearman correlation, by enumeration."""
    Y = np.asarray(Y)
    k = Y.shape[1]
    scores = {}
    for perm in itertools.permutations(range(1, k + 1)):
        scores[perm] = sum(1 - 6 * np.sum((np.array(perm) - row) ** 2) / (k * (k * k - 1))
                           for row in Y)
    top = max(scores.values())
    return top, [np.array(p) for p, s in scores.items() if s >= top - 1e-12]
