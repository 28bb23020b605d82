import json

import networkx as nx
import pytest
from hypothesis import given, settings

from hybrid_keynet.topology import (
    ComputeTier,
    LinkKind,
    PathError,
    ProtocolMode,
    TopologyError,
    parse_topology,
    serialize_topology,
    validate,
)

from conftest import fixture_path, load_topology
from strategies import topology_docs


def doc(**overrides):
    base = {
        "nodes": [{"id": "A", "kind": "EndUser"}, {"id": "B", "kind": "EndUser"}],
        "links": [{"id": "q", "endpoints": ["A", "B"], "kind": "Qkd", "length_km": 10}],
        "alice": "A",
        "bob": "B",
    }
    base.update(overrides)
    return json.dumps(base)


def test_minimal_topology_is_valid():
    topo = parse_topology(doc())
    assert validate(topo) == []
    link = topo.link("q")
    assert link.kind is LinkKind.QKD
    assert link.loss_db_per_km == 0.2
    assert link.protocol_mode is ProtocolMode.REPEATERLESS
    assert topo.node("A").compute_tier is ComputeTier.LIMITED


def test_data_center_defaults_to_high_performance():
    topo = load_topology("series_1000km.json")
    assert topo.node("D1").compute_tier is ComputeTier.HIGH_PERFORMANCE
    assert topo.compromise_prob("D1") == pytest.approx(0.05)


def test_alice_equals_bob_gives_one_violation():
    assert validate(load_topology("alice_equals_bob.json")) == ["alice and bob must differ"]


def test_disconnected_fixture():
    assert validate(load_topology("disconnected.json")) == ["no path alice→bob"]


def test_unknown_endpoint_is_a_parse_error():
    bad = doc(links=[{"id": "q", "endpoints": ["A", "Z"], "kind": "Qkd", "length_km": 1}])
    with pytest.raises(TopologyError, match="unknown node id Z"):
        parse_topology(bad)


def test_duplicate_ids_across_nodes_and_links():
    bad = doc(links=[{"id": "A", "endpoints": ["A", "B"], "kind": "Qkd", "length_km": 1}])
    with pytest.raises(TopologyError, match="duplicate id A"):
        parse_topology(bad)


@pytest.mark.parametrize(
    "link, message",
    [
        ({"id": "k", "endpoints": ["A", "B"], "kind": "Kem", "length_km": 3, "algorithm_label": "x"}, "not allowed"),
        ({"id": "k", "endpoints": ["A", "B"], "kind": "Kem"}, "requires algorithm_label"),
        ({"id": "q", "endpoints": ["A", "B"], "kind": "Qkd"}, "requires length_km"),
        ({"id": "q", "endpoints": ["A", "B"], "kind": "Qkd", "length_km": 1, "speed": 3}, "unknown"),
    ],
)
def test_kind_field_mismatch(link, message):
    with pytest.raises(TopologyError, match=message):
        parse_topology(doc(links=[link]))


def test_syntax_error_reports_position():
    with pytest.raises(TopologyError, match="line 1 column"):
        parse_topology('{"nodes": [')


def test_missing_bob():
    text = json.dumps({"nodes": [{"id": "A", "kind": "EndUser"}], "links": [], "alice": "A"})
    with pytest.raises(TopologyError, match="missing bob"):
        parse_topology(text)


def test_walk_and_path_errors():
    topo = load_topology("series_1000km.json")
    assert topo.walk(["q1", "k1", "q2"]) == ["A", "D1", "D2", "B"]
    with pytest.raises(PathError, match="contiguous"):
        topo.walk(["q1", "q2"])
    with pytest.raises(PathError, match="end at bob"):
        topo.walk(["q1", "k1"])
    with pytest.raises(PathError, match="unknown link"):
        topo.walk(["nope"])


def test_fixture_round_trip():
    text = fixture_path("topologies", "switch_demo.json").read_text()
    topo = parse_topology(text)
    assert parse_topology(serialize_topology(topo)) == topo


@settings(max_examples=150, deadline=None)
@given(topology_docs())
def test_serialize_parse_round_trip(document):
    topo = parse_topology(json.dumps(document))
    again = parse_topology(serialize_topology(topo))
    assert again == topo
    assert serialize_topology(again) == serialize_topology(topo)


@settings(max_examples=150, deadline=None)
@given(topology_docs())
def test_connectivity_matches_networkx(document):
    topo = parse_topology(json.dumps(document))
    g = nx.MultiGraph()
    g.add_nodes_from(n.id for n in topo.nodes)
    g.add_edges_from(l.endpoints for l in topo.links)
    connected = nx.has_path(g, topo.alice, topo.bob)
    assert ("no path alice→bob" in validate(topo)) == (not connected)
