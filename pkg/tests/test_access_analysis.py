import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hybrid_keynet.access_analysis import (
    And,
    ElementBoundExceeded,
    Leaf,
    LeafBoundExceeded,
    Or,
    Threshold,
    break_probability,
    check_leaves,
    derive_access_formula,
    elements,
    evaluate,
    minimal_access_structures,
)
from hybrid_keynet.protocols import Channel, ProtocolConfig

from access_oracle import brute_force_minimal_sets, brute_force_probability
from conftest import load_topology
from strategies import formulas


def sets(structures):
    return {frozenset(s) for s in structures.minimal_sets}


def test_series_gives_five_singletons():
    topo = load_topology("series_1000km.json")
    cfg = ProtocolConfig("series", (Channel("c", ("q1", "k1", "q2")),))
    f = derive_access_formula(topo, cfg)
    assert str(f) == "OR(q1,k1,q2,D1,D2)"
    res = minimal_access_structures(f)
    assert res.minimal_sets == (("D1",), ("D2",), ("k1",), ("q1",), ("q2",))


def test_parallel_xor_direct_links_give_one_pair():
    topo = load_topology("parallel_xor.json")
    cfg = ProtocolConfig("parallel_xor", (Channel("cq", ("q",)), Channel("ck", ("k",))))
    assert minimal_access_structures(derive_access_formula(topo, cfg)).minimal_sets == (("k", "q"),)


def test_shared_relay_collapses_to_singleton():
    topo = load_topology("mixed.json")
    cfg = ProtocolConfig("parallel_xor", (Channel("c1", ("a1", "b1")), Channel("c2", ("a2", "b2"))))
    res = minimal_access_structures(derive_access_formula(topo, cfg))
    assert res.minimal_sets == (("D1",), ("a1", "a2"), ("a1", "b2"), ("a2", "b1"), ("b1", "b2"))
    assert res.ranking()[0] == ("a1", 2)


def test_threshold_two_of_three():
    f = Threshold(2, (Leaf("x"), Leaf("y"), Leaf("z")))
    assert minimal_access_structures(f).minimal_sets == (("x", "y"), ("x", "z"), ("y", "z"))


def test_leaf_bound(monkeypatch):
    f = Or(tuple(Leaf(f"e{i}") for i in range(30)))
    with pytest.raises(LeafBoundExceeded, match="bound of 24"):
        minimal_access_structures(f)
    monkeypatch.setenv("HYBRID_KEYNET_MAX_LEAVES", "40")
    assert len(minimal_access_structures(f).minimal_sets) == 30


def test_element_bound_for_exact_probability():
    f = Or(tuple(Leaf(f"e{i}") for i in range(21)))
    res = minimal_access_structures(f)
    with pytest.raises(ElementBoundExceeded):
        break_probability(res, probs={f"e{i}": 0.1 for i in range(21)})


def test_check_leaves_flags_unknown_ids():
    topo = load_topology("minimal.json")
    assert check_leaves(And((Leaf("q"), Leaf("ghost"))), topo) == ["ghost"]


def test_series_break_probability_closed_form():
    topo = load_topology("series_1000km.json")
    cfg = ProtocolConfig("series", (Channel("c", ("q1", "k1", "q2")),))
    res = break_probability(minimal_access_structures(derive_access_formula(topo, cfg)), topo)
    survive = (1 - 0.01) ** 2 * (1 - 0.05) ** 3
    assert res.probability == pytest.approx(1 - survive, rel=1e-12)


@settings(max_examples=150, deadline=None)
@given(formulas(max_leaves=10))
def test_matches_brute_force(formula):
    expected = brute_force_minimal_sets(formula, evaluate, elements(formula))
    assert sets(minimal_access_structures(formula)) == expected


@settings(max_examples=100, deadline=None)
@given(formulas(max_leaves=10), st.data())
def test_probability_matches_brute_force(formula, data):
    els = elements(formula)
    probs = {e: data.draw(st.floats(0, 1)) for e in els}
    exact = break_probability(minimal_access_structures(formula), probs=probs).probability
    assert exact == pytest.approx(brute_force_probability(formula, evaluate, els, probs), abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(formulas(max_leaves=10), st.data())
def test_monotone_in_compromise_set(formula, data):
    els = elements(formula)
    small = set(data.draw(st.lists(st.sampled_from(els), unique=True)))
    large = small | set(data.draw(st.lists(st.sampled_from(els), unique=True)))
    assert evaluate(formula, small) <= evaluate(formula, large)


def test_monte_carlo_agreement():
    topo = load_topology("sharing.json")
    cfg = ProtocolConfig("parallel_secret_sharing",
                         (Channel("c1", ("a1", "b1")), Channel("c2", ("a2", "b2")), Channel("c3", ("k3",))), 2)
    structures = minimal_access_structures(derive_access_formula(topo, cfg))
    exact = break_probability(structures, topo).probability
    els = sorted({e for s in structures.minimal_sets for e in s})
    p = np.array([topo.compromise_prob(e) for e in els])
    rng = np.random.default_rng(2024)
    n = 1_000_000
    hit = rng.random((n, len(els))) < p
    broken = np.zeros(n, dtype=bool)
    for s in structures.minimal_sets:
        broken |= hit[:, [els.index(e) for e in s]].all(axis=1)
    estimate = broken.mean()
    stderr = math.sqrt(exact * (1 - exact) / n)
    assert abs(estimate - exact) < 3 * stderr
