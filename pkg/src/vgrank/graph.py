"""Verification graph data model and its JSON file format.

A verification graph is a directed, labelled multigraph whose nodes are the
AST nodes of every statement in a program. Statement roots sit at depth 0 and
their syntax subtrees hang below them via ``SD`` edges; ``CF``, ``CD`` and
``DD`` edges connect statement roots.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable

#: Bumped whenever a label is added or renamed.
LABEL_VOCABULARY_VERSION = 1

LABELS = (
    # statement roots
    "Loop",
    "If",
    "Decl",
    "Assign",
    "Incr",
    "Decr",
    "Assert",
    "Function_Call",
    "Function_Return",
    # expression leaves
    "Ref",
    "Input",
    "Int_Literal_Small",
    "Int_Literal_Medium",
    "Int_Literal_Large",
    # operators
    "BinOp_Add",
    "BinOp_Sub",
    "BinOp_Mul",
    "BinOp_Div",
    "BinOp_Mod",
    "BinOp_Less",
    "BinOp_LessEq",
    "BinOp_Greater",
    "BinOp_GreaterEq",
    "BinOp_Eq",
    "BinOp_NotEq",
    "BoolOp_And",
    "BoolOp_Or",
    "UnOp_Not",
    "UnOp_Neg",
)
_LABEL_SET = frozenset(LABELS)

EDGE_TYPES = ("CD", "DD", "SD", "CF")


class GraphFormatError(ValueError):
    """Raised when a graph violates the file schema or a model invariant."""


@dataclass(frozen=True)
class Node:
    id: int
    label: str
    depth: int


@dataclass(frozen=True)
class Edge:
    id: int
    src: int
    dst: int
    type: str
    cond: bool = True


@dataclass(frozen=True)
class NeighborSelector:
    """Chooses which outgoing edge kinds take part in relabelling."""

    edge_kinds: frozenset

    def __init__(self, edge_kinds: Iterable[str]):
        kinds = frozenset(edge_kinds)
        if not kinds:
            raise ValueError("a neighbor selector needs at least one edge kind")
        unknown = kinds - set(EDGE_TYPES)
        if unknown:
            raise ValueError(f"unknown edge kinds: {sorted(unknown)}")
        object.__setattr__(self, "edge_kinds", kinds)

    @classmethod
    def parse(cls, text: str) -> "NeighborSelector":
        """Build from a comma separated list such as ``"CD,DD"``."""
        return cls(part.strip().upper() for part in text.split(",") if part.strip())

    def __str__(self) -> str:
        return ",".join(k for k in EDGE_TYPES if k in self.edge_kinds)


@dataclass(frozen=True)
class VerificationGraph:
    """Immutable verification graph.

    Node and edge ids are dense (``0..n-1``) and both sequences are stored in
    ascending id order, so ``nodes[i].id == i``.
    """

    nodes: tuple[Node, ...]
    edges: tuple[Edge, ...]
    _out: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        nodes = tuple(sorted(self.nodes, key=lambda n: n.id))
        edges = tuple(sorted(self.edges, key=lambda e: e.id))
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", edges)
        _validate(nodes, edges)
        out: list[list[int]] = [[] for _ in nodes]
        for e in edges:
            out[e.src].append(e.id)
        object.__setattr__(self, "_out", tuple(tuple(ids) for ids in out))

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def labels(self) -> list[str]:
        return [n.label for n in self.nodes]

    @property
    def depths(self) -> list[int]:
        return [n.depth for n in self.nodes]

    def out_edges(self, node: int) -> tuple[int, ...]:
        if not 0 <= node < len(self.nodes):
            raise KeyError(f"unknown node id {node}")
        return self._out[node]

    def roots(self) -> list[int]:
        return [n.id for n in self.nodes if n.depth == 0]


def _validate(nodes: tuple[Node, ...], edges: tuple[Edge, ...]) -> None:
    if [n.id for n in nodes] != list(range(len(nodes))):
        raise GraphFormatError("node ids must be unique and dense (0..n-1)")
    if [e.id for e in edges] != list(range(len(edges))):
        raise GraphFormatError("edge ids must be unique and dense (0..m-1)")
    for n in nodes:
        if n.label not in _LABEL_SET:
            raise GraphFormatError(f"node {n.id}: unknown label {n.label!r}")
        if isinstance(n.depth, bool) or not isinstance(n.depth, int) or n.depth < 0:
            raise GraphFormatError(f"node {n.id}: depth must be a non-negative integer")
    has_sd_parent = [False] * len(nodes)
    for e in edges:
        if not (0 <= e.src < len(nodes) and 0 <= e.dst < len(nodes)):
            raise GraphFormatError(f"edge {e.id}: dangling endpoint {e.src}->{e.dst}")
        if e.type not in EDGE_TYPES:
            raise GraphFormatError(f"edge {e.id}: unknown type {e.type!r}")
        if not isinstance(e.cond, bool):
            raise GraphFormatError(f"edge {e.id}: cond must be a boolean")
        if not e.cond and e.type != "CD":
            raise GraphFormatError(f"edge {e.id}: cond=false is only allowed on CD edges")
        if e.type == "SD":
            if nodes[e.dst].depth != nodes[e.src].depth + 1:
                raise GraphFormatError(f"edge {e.id}: SD edge must increase depth by one")
            has_sd_parent[e.dst] = True
    for n in nodes:
        if (n.depth == 0) == has_sd_parent[n.id]:
            raise GraphFormatError(
                f"node {n.id}: depth 0 iff the node has no incoming SD edge"
            )


def neighbors(g: VerificationGraph, node: int, selector: NeighborSelector) -> list[int]:
    """Outgoing edge ids of ``node`` whose type is selected, ascending."""
    kinds = selector.edge_kinds
    return [eid for eid in g.out_edges(node) if g.edges[eid].type in kinds]


def graph_to_dict(g: VerificationGraph) -> dict:
    return {
        "nodes": [{"id": n.id, "label": n.label, "depth": n.depth} for n in g.nodes],
        "edges": [
            {"id": e.id, "src": e.src, "dst": e.dst, "type": e.type, "cond": e.cond}
            for e in g.edges
        ],
    }


def graph_from_dict(obj) -> VerificationGraph:
    if not isinstance(obj, dict) or set(obj) != {"nodes", "edges"}:
        raise GraphFormatError("graph object must have exactly the keys 'nodes' and 'edges'")
    if not isinstance(obj["nodes"], list) or not isinstance(obj["edges"], list):
        raise GraphFormatError("'nodes' and 'edges' must be lists")
    nodes, edges = [], []
    for raw in obj["nodes"]:
        _check_keys(raw, {"id", "label", "depth"}, "node")
        _check_int(raw["id"], "node id")
        nodes.append(Node(raw["id"], raw["label"], raw["depth"]))
    for raw in obj["edges"]:
        _check_keys(raw, {"id", "src", "dst", "type", "cond"}, "edge")
        for key in ("id", "src", "dst"):
            _check_int(raw[key], f"edge {key}")
        edges.append(Edge(raw["id"], raw["src"], raw["dst"], raw["type"], raw["cond"]))
    return VerificationGraph(tuple(nodes), tuple(edges))


def _check_keys(raw, expected: set, what: str) -> None:
    if not isinstance(raw, dict) or set(raw) != expected:
        raise GraphFormatError(f"{what} entries must have exactly the keys {sorted(expected)}")


def _check_int(value, what: str) -> None:
    if isinstance(value, bool) or not isinstance(value, int):
        raise GraphFormatError(f"{what} must be an integer, got {value!r}")


def save_graph(g: VerificationGraph) -> bytes:
    return json.dumps(graph_to_dict(g), separators=(",", ":")).encode("utf-8")


def load_graph(data: bytes | str) -> VerificationGraph:
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"invalid JSON: {exc}") from exc
    return graph_from_dict(obj)


def read_graph(path) -> VerificationGraph:
    with open(path, "rb") as fh:
        return load_graph(fh.read())


def write_graph(g: VerificationGraph, path) -> None:
    with open(path, "wb") as fh:
        fh.write(save_graph(g))
