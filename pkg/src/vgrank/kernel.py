"""Weisfeiler-Lehman style kernel on verification graphs.

Each refinement round replaces a node's label by a compressed encoding of its
own label followed by the sorted compressed ``(target label, edge type,
edge cond)`` triples of its selected outgoing edges. The kernel sums, over
the original labelling and every refined one, the number of equally labelled
node pairs whose depth is within the depth bound.
"""
from __future__ import annotations

import hashlib
import json
import threading
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .graph import EDGE_TYPES, NeighborSelector, VerificationGraph

DEFAULT_DEPTH = 5
DEFAULT_ITERATIONS = 2


class CompressionTable:
    """Injective map from label strings to consecutive integers.

    Shared by every graph of one Gram computation so that equal patterns in
    different graphs receive equal labels. Registration is atomic.
    """

    def __init__(self, strings: Iterable[str] = ()):
        self._ids: dict[str, int] = {}
        self._strings: list[str] = []
        self._lock = threading.Lock()
        for s in strings:
            self(s)

    def __call__(self, key: str) -> int:
        found = self._ids.get(key)
        if found is not None:
            return found
        with self._lock:
            found = self._ids.get(key)
            if found is None:
                found = len(self._strings)
                self._ids[key] = found
                self._strings.append(key)
            return found

    def __len__(self) -> int:
        return len(self._strings)

    def __contains__(self, key: str) -> bool:
        return key in self._ids

    @property
    def strings(self) -> list[str]:
        return list(self._strings)


@dataclass(frozen=True)
class KernelConfig:
    selector: NeighborSelector
    depth: int = DEFAULT_DEPTH
    iterations: int = DEFAULT_ITERATIONS

    def __post_init__(self):
        if self.depth < 0 or self.iterations < 0:
            raise ValueError("depth and iterations must be non-negative")

    def to_dict(self) -> dict:
        return {"edges": str(self.selector), "depth": self.depth, "iterations": self.iterations}

    @classmethod
    def from_dict(cls, obj: dict) -> "KernelConfig":
        return cls(NeighborSelector.parse(obj["edges"]), int(obj["depth"]), int(obj["iterations"]))


def fingerprint(configs: Sequence[KernelConfig], weights: Sequence[float] | None = None) -> str:
    payload = {
        "configs": [c.to_dict() for c in configs],
        "weights": None if weights is None else [float(w) for w in weights],
    }
    blob = json.dumps(payload, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def initial_labels(g: VerificationGraph, table: CompressionTable) -> list[int]:
    return [table("L:" + label) for label in g.labels]


def relabel_step(
    g: VerificationGraph,
    labels: Sequence[int],
    selector: NeighborSelector,
    table: CompressionTable,
) -> list[int]:
    """One synchronous refinement round; returns the new label per node."""
    kinds = selector.edge_kinds
    edges = g.edges
    new = []
    for node in range(len(g)):
        aug = sorted(
            table(f"T:{labels[e.dst]}:{e.type}:{int(e.cond)}")
            for e in (edges[eid] for eid in g.out_edges(node))
            if e.type in kinds
        )
        new.append(table(f"N:{labels[node]}:" + ",".join(map(str, aug))))
    return new


def label_history(
    g: VerificationGraph, selector: NeighborSelector, iterations: int, table: CompressionTable
) -> list[list[int]]:
    """Labelings for rounds ``0..iterations``; round 0 is the original one."""
    labels = initial_labels(g, table)
    history = [labels]
    for _ in range(iterations):
        labels = relabel_step(g, labels, selector, table)
        history.append(labels)
    return history


def feature_counts(
    g: VerificationGraph, config: KernelConfig, table: CompressionTable
) -> Counter:
    """Histogram of labels over all rounds, counting only nodes within the depth bound.

    Labels from different rounds never collide (each round's strings embed
    the previous round's ids), so one flat histogram per graph suffices.
    """
    keep = [d <= config.depth for d in g.depths]
    counts: Counter = Counter()
    for labels in label_history(g, config.selector, config.iterations, table):
        counts.update(lab for lab, k in zip(labels, keep) if k)
    return counts


def wl_kernel(
    g1: VerificationGraph,
    g2: VerificationGraph,
    config: KernelConfig,
    table: CompressionTable | None = None,
) -> int:
    table = CompressionTable() if table is None else table
    c1 = feature_counts(g1, config, table)
    c2 = feature_counts(g2, config, table)
    if len(c2) < len(c1):
        c1, c2 = c2, c1
    return sum(v * c2[k] for k, v in c1.items() if k in c2)


def _feature_matrix(counts: list[Counter], n_features: int) -> sp.csr_matrix:
    rows, cols, vals = [], [], []
    for r, c in enumerate(counts):
        for k, v in c.items():
            rows.append(r)
            cols.append(k)
            vals.append(v)
    return sp.csr_matrix(
        (np.asarray(vals, dtype=np.int64), (rows, cols)), shape=(len(counts), n_features)
    )


@dataclass
class GramMatrix:
    """Kernel matrix over an ordered task list, as stored in gram files.

    ``config`` records the kernel configurations, their weights and the
    fingerprint; ``tables`` holds each kernel's compression table (strings in
    id order) so that the labelling can be reproduced.
    """

    tasks: list[str]
    matrix: np.ndarray
    config: dict
    tables: list[list[str]] | None = None

    def to_dict(self) -> dict:
        out = {
            "tasks": list(self.tasks),
            "config": self.config,
            "matrix": self.matrix.tolist(),
        }
        if self.tables is not None:
            out["tables"] = self.tables
        return out

    @classmethod
    def from_dict(cls, obj: dict) -> "GramMatrix":
        matrix = np.asarray(obj["matrix"], dtype=float)
        n = len(obj["tasks"])
        if matrix.shape != (n, n):
            raise ValueError(f"matrix shape {matrix.shape} does not match {n} tasks")
        return cls(list(obj["tasks"]), matrix, obj["config"], obj.get("tables"))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path) -> "GramMatrix":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def config_dict(configs: Sequence[KernelConfig], weights: Sequence[float]) -> dict:
    return {
        "kernels": [c.to_dict() for c in configs],
        "weights": [float(w) for w in weights],
        "fingerprint": fingerprint(configs, weights),
    }


def compute_gram(tasks: Sequence[str], graphs: Sequence[VerificationGraph],
                 configs: Sequence[KernelConfig],
                 weights: Sequence[float] | None = None) -> GramMatrix:
    """Weighted combination of one Gram matrix per kernel configuration."""
    if weights is None:
        weights = [1.0 / len(configs)] * len(configs)
    if len(weights) != len(configs):
        raise ValueError("one weight per kernel configuration is required")
    parts, tables = [], []
    for c in configs:
        table = CompressionTable()
        parts.append(gram(graphs, c, table))
        tables.append(table.strings)
    matrix = combine(list(zip(weights, parts)))
    return GramMatrix(list(tasks), matrix, config_dict(configs, weights), tables)


def gram(graphs: Sequence[VerificationGraph], config: KernelConfig,
         table: CompressionTable | None = None) -> np.ndarray:
    """Kernel matrix over ``graphs`` with one shared compression table."""
    if not graphs:
        raise ValueError("need at least one graph")
    table = CompressionTable() if table is None else table
    counts = [feature_counts(g, config, table) for g in graphs]
    phi = _feature_matrix(counts, len(table))
    return (phi @ phi.T).toarray().astype(float)


def combine(grams: Sequence[tuple[float, np.ndarray]]) -> np.ndarray:
    """Positive-weighted sum of equally shaped Gram matrices."""
    if not grams:
        raise ValueError("nothing to combine")
    shape = np.shape(grams[0][1])
    total = np.zeros(shape)
    for weight, matrix in grams:
        if weight <= 0:
            raise ValueError("combination weights must be positive")
        if np.shape(matrix) != shape:
            raise ValueError(f"dimension mismatch: {np.shape(matrix)} vs {shape}")
        total += weight * np.asarray(matrix, dtype=float)
    return total


class WLKernel(BaseEstimator, TransformerMixin):
    """Verification graph kernel as a transformer.

    ``fit`` takes a sequence of training graphs; ``transform`` maps graphs to
    their kernel values against the training graphs, an array of shape
    ``(n_graphs, n_train)``. ``fit_transform`` therefore yields the Gram
    matrix.

    Parameters
    ----------
    edges : str or iterable of str, default="CF"
        Edge kinds followed during relabelling, e.g. ``"CD,DD"``.
    depth : int, default=5
        Only nodes at most this deep below their statement root are counted.
    iterations : int, default=2
        Number of refinement rounds.
    """

    def __init__(self, edges="CF", depth=DEFAULT_DEPTH, iterations=DEFAULT_ITERATIONS):
        self.edges = edges
        self.depth = depth
        self.iterations = iterations

    @property
    def config(self) -> KernelConfig:
        sel = (NeighborSelector.parse(self.edges) if isinstance(self.edges, str)
               else NeighborSelector(self.edges))
        return KernelConfig(sel, int(self.depth), int(self.iterations))

    def fit(self, X, y=None):
        graphs = _check_graphs(X)
        self.table_ = CompressionTable()
        config = self.config
        self.train_counts_ = [feature_counts(g, config, self.table_) for g in graphs]
        self.n_train_ = len(graphs)
        return self

    def transform(self, X):
        check_is_fitted(self, "table_")
        graphs = _check_graphs(X)
        config = self.config
        counts = [feature_counts(g, config, self.table_) for g in graphs]
        n = len(self.table_)
        phi = _feature_matrix(counts, n)
        phi_train = _feature_matrix(self.train_counts_, n)
        return (phi @ phi_train.T).toarray().astype(float)

    def fit_transform(self, X, y=None):
        self.fit(X)
        phi = _feature_matrix(self.train_counts_, len(self.table_))
        return (phi @ phi.T).toarray().astype(float)


class CombinedKernel(BaseEstimator, TransformerMixin):
    """Weighted sum of several :class:`WLKernel` transformers."""

    def __init__(self, kernels=(), weights=None):
        self.kernels = kernels
        self.weights = weights

    def _weights(self):
        if self.weights is None:
            return [1.0 / len(self.kernels)] * len(self.kernels)
        if len(self.weights) != len(self.kernels):
            raise ValueError("one weight per kernel is required")
        return list(self.weights)

    def fit(self, X, y=None):
        if not self.kernels:
            raise ValueError("no kernels to combine")
        self.kernels_ = [WLKernel(**k.get_params()).fit(X) for k in self.kernels]
        return self

    def transform(self, X):
        check_is_fitted(self, "kernels_")
        return combine([(w, k.transform(X)) for w, k in zip(self._weights(), self.kernels_)])

    def fit_transform(self, X, y=None):
        self.fit(X)
        return combine([
            (w, _feature_matrix_gram(k)) for w, k in zip(self._weights(), self.kernels_)
        ])


def _feature_matrix_gram(k: WLKernel) -> np.ndarray:
    phi = _feature_matrix(k.train_counts_, len(k.table_))
    return (phi @ phi.T).toarray().astype(float)


def _check_graphs(X) -> list[VerificationGraph]:
    graphs = list(X)
    if not graphs:
        raise ValueError("expected at least one graph")
    for g in graphs:
        if not isinstance(g, VerificationGraph):
            raise TypeError(f"expected VerificationGraph, got {type(g).__name__}")
    return graphs


def kernel_configs(edge_specs: Sequence[str], depth: int, iterations: int) -> list[KernelConfig]:
    return [KernelConfig(NeighborSelector.parse(e), depth, iterations) for e in edge_specs]


__all__ = [
    "CombinedKernel",
    "CompressionTable",
    "EDGE_TYPES",
    "GramMatrix",
    "KernelConfig",
    "WLKernel",
    "combine",
    "compute_gram",
    "config_dict",
    "feature_counts",
    "fingerprint",
    "gram",
    "initial_labels",
    "kernel_configs",
    "label_history",
    "relabel_step",
    "wl_kernel",
]
