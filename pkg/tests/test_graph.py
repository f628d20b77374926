import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import random_graph
from vgrank.frontend import extract
from vgrank.graph import (
    EDGE_TYPES,
    Edge,
    GraphFormatError,
    NeighborSelector,
    Node,
    VerificationGraph,
    graph_from_dict,
    graph_to_dict,
    load_graph,
    neighbors,
    read_graph,
    save_graph,
    write_graph,
)


def two_root_graph():
    nodes = (Node(0, "Assign", 0), Node(1, "Ref", 1), Node(2, "Assert", 0))
    edges = (Edge(0, 0, 2, "CF"), Edge(1, 0, 1, "SD"), Edge(2, 0, 2, "CD", False),
             Edge(3, 0, 2, "DD"))
    return VerificationGraph(nodes, edges)


def test_no_outgoing_edges():
    g = two_root_graph()
    for kinds in (["CF"], EDGE_TYPES):
        assert neighbors(g, 2, NeighborSelector(kinds)) == []


def test_selector_filters_by_kind():
    g = two_root_graph()
    assert neighbors(g, 0, NeighborSelector(["CF"])) == [0]
    assert neighbors(g, 0, NeighborSelector.parse("CD,DD")) == [2, 3]
    assert neighbors(g, 0, NeighborSelector(EDGE_TYPES)) == [0, 1, 2, 3]


def test_unknown_node():
    with pytest.raises(KeyError):
        neighbors(two_root_graph(), 7, NeighborSelector(["CF"]))


def test_selector_parse_and_str():
    assert str(NeighborSelector.parse("dd, cd")) == "CD,DD"
    with pytest.raises(ValueError):
        NeighborSelector.parse("XX")
    with pytest.raises(ValueError):
        NeighborSelector([])


def test_empty_graph_round_trip():
    g = load_graph(b'{"nodes": [], "edges": []}')
    assert len(g) == 0
    assert load_graph(save_graph(g)) == g


def test_p_sum_round_trip(p_sum_source, tmp_path):
    g = extract(p_sum_source)
    assert load_graph(save_graph(g)) == g
    write_graph(g, tmp_path / "g.json")
    assert read_graph(tmp_path / "g.json") == g


def test_load_ignores_listing_order():
    g = two_root_graph()
    d = graph_to_dict(g)
    d["nodes"].reverse()
    d["edges"].reverse()
    assert graph_from_dict(d) == g


def _with(edit):
    d = graph_to_dict(two_root_graph())
    edit(d)
    return json.dumps(d)


@pytest.mark.parametrize("edit, message", [
    (lambda d: d["edges"][0].update(cond=False), "cond=false"),
    (lambda d: d["nodes"][0].update(label="Pointer"), "unknown label"),
    (lambda d: d["edges"][0].update(dst=9), "dangling"),
    (lambda d: d["nodes"][1].update(depth=2), "depth"),
    (lambda d: d["edges"][0].update(type="XX"), "unknown type"),
    (lambda d: d["nodes"][0].update(extra=1), "keys"),
    (lambda d: d.pop("edges"), "keys"),
])
def test_invalid_graphs_rejected(edit, message):
    with pytest.raises(GraphFormatError, match=message):
        load_graph(_with(edit))


def test_depth_zero_needs_no_sd_parent():
    nodes = (Node(0, "Assign", 0), Node(1, "Ref", 0))
    with pytest.raises(GraphFormatError):
        VerificationGraph(nodes, (Edge(0, 0, 1, "SD"),))
    with pytest.raises(GraphFormatError):
        VerificationGraph((Node(0, "Assign", 0), Node(1, "Ref", 1)), ())


kinds = st.sets(st.sampled_from(EDGE_TYPES), min_size=1)


@given(seed=st.integers(0, 2**32 - 1), small=kinds, extra=kinds)
def test_selector_monotone(seed, small, extra):
    g = random_graph(np.random.default_rng(seed), max_nodes=20)
    lo, hi = NeighborSelector(small), NeighborSelector(small | extra)
    everything = NeighborSelector(EDGE_TYPES)
    for n in range(len(g)):
        assert set(neighbors(g, n, lo)) <= set(neighbors(g, n, hi))
        assert neighbors(g, n, everything) == sorted(g.out_edges(n))


@given(seed=st.integers(0, 2**32 - 1))
def test_round_trip_random(seed):
    g = random_graph(np.random.default_rng(seed), max_nodes=30)
    assert load_graph(save_graph(g)) == g
