"""Hypothesis strategies shared across test modules."""

from hypothesis import strategies as st

from hybrid_keynet.access_analysis import And, Leaf, Or, Threshold

LABELS = ("lattice-kem", "hash-dsa", "code-kem")


@st.composite
def topology_docs(draw, max_nodes=7, max_links=10):
    """Random but well-formed topology documents (may be disconnected)."""
    n = draw(st.integers(2, max_nodes))
    nodes = []
    for i in range(n):
        kind = "EndUser" if i < 2 else draw(st.sampled_from(["EndUser", "DataCenter"]))
        node = {"id": f"N{i}", "kind": kind}
        if draw(st.booleans()):
            node["compute_tier"] = draw(st.sampled_from(["Limited", "HighPerformance"]))
        if draw(st.booleans()):
            node["trust_weight"] = draw(st.floats(0, 1))
        nodes.append(node)
    links = []
    for j in range(draw(st.integers(0, max_links))):
        a, b = draw(st.lists(st.integers(0, n - 1), min_size=2, max_size=2, unique=True))
        link = {"id": f"L{j}", "endpoints": [f"N{a}", f"N{b}"]}
        if draw(st.booleans()):
            link.update(kind="Qkd", length_km=draw(st.floats(0, 400)))
            if draw(st.booleans()):
                link["protocol_mode"] = draw(st.sampled_from(["Repeaterless", "TwinField"]))
        else:
            link.update(kind="Kem", algorithm_label=draw(st.sampled_from(LABELS)), rtt_ms=draw(st.floats(0, 50)))
        if draw(st.booleans()):
            link["compromise_prob"] = draw(st.floats(0, 1))
        links.append(link)
    return {"nodes": nodes, "links": links, "alice": "N0", "bob": "N1"}


def formulas(max_leaves=12, alphabet=8):
    names = [f"e{i}" for i in range(alphabet)]
    leaf = st.sampled_from(names).map(Leaf)

    def extend(children):
        kids = st.lists(children, min_size=1, max_size=4).map(tuple)
        return st.one_of(
            kids.map(And),
            kids.map(Or),
            kids.flatmap(lambda cs: st.integers(1, len(cs)).map(lambda t: Threshold(t, cs))),
        )

    return st.recursive(leaf, extend, max_leaves=max_leaves)
