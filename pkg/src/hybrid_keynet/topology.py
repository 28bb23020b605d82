"""Network description: nodes, typed links, and the two end users.

Topologies are immutable once built. ``parse_topology`` handles the strict
JSON document format; ``validate`` reports semantic violations as values.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Any, Iterable, Sequence

DEFAULT_LOSS_DB_PER_KM = 0.2
DEFAULT_COMPROMISE_PROB = 0.0
DEFAULT_TRUST_WEIGHT = 1.0


class TopologyError(ValueError):
    """Malformed topology document or inconsistent construction."""


class PathError(ValueError):
    """A link path does not connect alice to bob."""


class NodeKind(str, Enum):
    END_USER = "EndUser"
    DATA_CENTER = "DataCenter"


class ComputeTier(str, Enum):
    LIMITED = "Limited"
    HIGH_PERFORMANCE = "HighPerformance"


class LinkKind(str, Enum):
    QKD = "Qkd"
    KEM = "Kem"


class ProtocolMode(str, Enum):
    REPEATERLESS = "Repeaterless"
    TWIN_FIELD = "TwinField"


_QKD_FIELDS = ("length_km", "loss_db_per_km", "protocol_mode")
_KEM_FIELDS = ("algorithm_label", "rtt_ms")


@dataclass(frozen=True)
class Node:
    id: str
    kind: NodeKind
    compute_tier: ComputeTier
    trust_weight: float = DEFAULT_TRUST_WEIGHT

    @property
    def compromise_prob(self) -> float:
        return 1.0 - self.trust_weight


@dataclass(frozen=True)
class Link:
    """A QKD or KEM link. Kind-specific fields are ``None`` for the other kind."""

    id: str
    endpoints: tuple[str, str]
    kind: LinkKind
    length_km: float | None = None
    loss_db_per_km: float | None = None
    protocol_mode: ProtocolMode | None = None
    algorithm_label: str | None = None
    rtt_ms: float | None = None
    compromise_prob: float = DEFAULT_COMPROMISE_PROB

    def __post_init__(self) -> None:
        own, other = (
            (_QKD_FIELDS, _KEM_FIELDS) if self.kind is LinkKind.QKD else (_KEM_FIELDS, _QKD_FIELDS)
        )
        missing = [name for name in own if getattr(self, name) is None]
        stray = [name for name in other if getattr(self, name) is not None]
        if missing or stray:
            raise TopologyError(
                f"link {self.id}: {self.kind.value} link requires {list(own)}, "
                f"got missing={missing} unexpected={stray}"
            )

    def other_end(self, node_id: str) -> str:
        a, b = self.endpoints
        if node_id == a:
            return b
        if node_id == b:
            return a
        raise PathError(f"link {self.id} is not incident to {node_id}")


@dataclass(frozen=True)
class NetworkTopology:
    nodes: tuple[Node, ...]
    links: tuple[Link, ...]
    alice: str
    bob: str

    @cached_property
    def _node_index(self) -> dict[str, Node]:
        return {n.id: n for n in self.nodes}

    @cached_property
    def _link_index(self) -> dict[str, Link]:
        return {l.id: l for l in self.links}

    def node(self, node_id: str) -> Node:
        return self._node_index[node_id]

    def link(self, link_id: str) -> Link:
        try:
            return self._link_index[link_id]
        except KeyError:
            raise PathError(f"unknown link id {link_id}") from None

    def has_node(self, node_id: str) -> bool:
        return node_id in self._node_index

    def has_link(self, link_id: str) -> bool:
        return link_id in self._link_index

    def incident_links(self, node_id: str) -> list[str]:
        return [l.id for l in self.links if node_id in l.endpoints]

    def compromise_prob(self, element_id: str) -> float:
        """Per-element compromise probability; nodes use ``1 - trust_weight``."""
        if element_id in self._link_index:
            return self._link_index[element_id].compromise_prob
        if element_id in self._node_index:
            return self._node_index[element_id].compromise_prob
        raise KeyError(element_id)

    def walk(self, path: Sequence[str]) -> list[str]:
        """Return the node sequence visited by ``path``, starting at alice.

        Raises PathError unless the links are contiguous and end at bob.
        """
        if not path:
            raise PathError("path must contain at least one link")
        current = self.alice
        visited = [current]
        for link_id in path:
            link = self.link(link_id)
            if current not in link.endpoints:
                raise PathError(f"path not contiguous at link {link_id} (expected an endpoint {current})")
            current = link.other_end(current)
            visited.append(current)
        if current != self.bob:
            raise PathError(f"path must end at bob {self.bob}, ends at {current}")
        return visited


def _fail(msg: str) -> None:
    raise TopologyError(msg)


def _check_keys(obj: Any, allowed: Iterable[str], where: str) -> dict:
    if not isinstance(obj, dict):
        _fail(f"{where}: expected an object")
    unknown = sorted(set(obj) - set(allowed))
    if unknown:
        _fail(f"{where}: unknown keys {unknown}")
    return obj


def _number(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(f"{where}: expected a number, got {value!r}")
    return float(value)


def _string(value: Any, where: str) -> str:
    if not isinstance(value, str) or not value:
        _fail(f"{where}: expected a nonempty string, got {value!r}")
    return value


def _enum(cls: type[Enum], value: Any, where: str):
    try:
        return cls(value)
    except ValueError:
        _fail(f"{where}: {value!r} is not one of {[m.value for m in cls]}")


def _parse_node(obj: Any, i: int) -> Node:
    where = f"nodes[{i}]"
    _check_keys(obj, ("id", "kind", "compute_tier", "trust_weight"), where)
    for key in ("id", "kind"):
        if key not in obj:
            _fail(f"{where}: missing {key}")
    kind = _enum(NodeKind, obj["kind"], f"{where}.kind")
    if "compute_tier" in obj:
        tier = _enum(ComputeTier, obj["compute_tier"], f"{where}.compute_tier")
    else:
        tier = ComputeTier.LIMITED if kind is NodeKind.END_USER else ComputeTier.HIGH_PERFORMANCE
    return Node(
        id=_string(obj["id"], f"{where}.id"),
        kind=kind,
        compute_tier=tier,
        trust_weight=_number(obj.get("trust_weight", DEFAULT_TRUST_WEIGHT), f"{where}.trust_weight"),
    )


def _parse_link(obj: Any, i: int, node_ids: set[str]) -> Link:
    where = f"links[{i}]"
    _check_keys(obj, ("id", "endpoints", "kind", "compromise_prob") + _QKD_FIELDS + _KEM_FIELDS, where)
    for key in ("id", "endpoints", "kind"):
        if key not in obj:
            _fail(f"{where}: missing {key}")
    link_id = _string(obj["id"], f"{where}.id")
    where = f"link {link_id}"
    ends = obj["endpoints"]
    if not isinstance(ends, list) or len(ends) != 2:
        _fail(f"{where}: endpoints must be a list of two node ids")
    ends = tuple(_string(e, f"{where}.endpoints") for e in ends)
    for e in ends:
        if e not in node_ids:
            _fail(f"{where}: unknown node id {e}")
    kind = _enum(LinkKind, obj["kind"], f"{where}.kind")
    own, other = (_QKD_FIELDS, _KEM_FIELDS) if kind is LinkKind.QKD else (_KEM_FIELDS, _QKD_FIELDS)
    stray = [k for k in other if k in obj]
    if stray:
        _fail(f"{where}: fields {stray} not allowed on a {kind.value} link")
    fields: dict[str, Any] = {}
    if kind is LinkKind.QKD:
        if "length_km" not in obj:
            _fail(f"{where}: Qkd link requires length_km")
        fields["length_km"] = _number(obj["length_km"], f"{where}.length_km")
        fields["loss_db_per_km"] = _number(
            obj.get("loss_db_per_km", DEFAULT_LOSS_DB_PER_KM), f"{where}.loss_db_per_km"
        )
        fields["protocol_mode"] = _enum(
            ProtocolMode, obj.get("protocol_mode", ProtocolMode.REPEATERLESS.value), f"{where}.protocol_mode"
        )
    else:
        if "algorithm_label" not in obj:
            _fail(f"{where}: Kem link requires algorithm_label")
        fields["algorithm_label"] = _string(obj["algorithm_label"], f"{where}.algorithm_label")
        fields["rtt_ms"] = _number(obj.get("rtt_ms", 0.0), f"{where}.rtt_ms")
    return Link(
        id=link_id,
        endpoints=ends,
        kind=kind,
        compromise_prob=_number(obj.get("compromise_prob", DEFAULT_COMPROMISE_PROB), f"{where}.compromise_prob"),
        **fields,
    )


def parse_topology(text: str) -> NetworkTopology:
    """Parse a strict JSON topology document.

    Structural problems (syntax, unknown or duplicate ids, missing alice/bob,
    kind/field mismatch) raise TopologyError. Semantic invariants such as
    ``alice != bob`` or connectivity are left to :func:`validate`.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TopologyError(f"syntax error at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    _check_keys(doc, ("nodes", "links", "alice", "bob"), "document")
    for key in ("nodes", "links"):
        if not isinstance(doc.get(key), list):
            _fail(f"document: {key} must be an array")
    for key in ("alice", "bob"):
        if key not in doc:
            _fail(f"document: missing {key}")

    nodes = [_parse_node(obj, i) for i, obj in enumerate(doc["nodes"])]
    seen: set[str] = set()
    for n in nodes:
        if n.id in seen:
            _fail(f"duplicate id {n.id}")
        seen.add(n.id)
    node_ids = set(seen)
    links = [_parse_link(obj, i, node_ids) for i, obj in enumerate(doc["links"])]
    # node and link ids share one namespace: both appear as access-formula leaves
    for l in links:
        if l.id in seen:
            _fail(f"duplicate id {l.id}")
        seen.add(l.id)
    alice = _string(doc["alice"], "alice")
    bob = _string(doc["bob"], "bob")
    for name, ref in (("alice", alice), ("bob", bob)):
        if ref not in node_ids:
            _fail(f"{name}: unknown node id {ref}")
    return NetworkTopology(nodes=tuple(nodes), links=tuple(links), alice=alice, bob=bob)


def topology_to_dict(topology: NetworkTopology) -> dict:
    nodes = [
        {
            "id": n.id,
            "kind": n.kind.value,
            "compute_tier": n.compute_tier.value,
            "trust_weight": n.trust_weight,
        }
        for n in topology.nodes
    ]
    links = []
    for l in topology.links:
        entry: dict[str, Any] = {"id": l.id, "endpoints": list(l.endpoints), "kind": l.kind.value}
        if l.kind is LinkKind.QKD:
            entry.update(length_km=l.length_km, loss_db_per_km=l.loss_db_per_km, protocol_mode=l.protocol_mode.value)
        else:
            entry.update(algorithm_label=l.algorithm_label, rtt_ms=l.rtt_ms)
        entry["compromise_prob"] = l.compromise_prob
        links.append(entry)
    return {"nodes": nodes, "links": links, "alice": topology.alice, "bob": topology.bob}


def serialize_topology(topology: NetworkTopology) -> str:
    """Serialize with every field explicit, so parsing reproduces the value exactly."""
    return json.dumps(topology_to_dict(topology), indent=2) + "\n"


def _reachable(topology: NetworkTopology, start: str) -> set[str]:
    adjacency: dict[str, set[str]] = {n.id: set() for n in topology.nodes}
    for l in topology.links:
        a, b = l.endpoints
        if a in adjacency and b in adjacency:
            adjacency[a].add(b)
            adjacency[b].add(a)
    seen = {start}
    queue = deque([start])
    while queue:
        for nxt in adjacency[queue.popleft()]:
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return seen


def validate(topology: NetworkTopology) -> list[str]:
    """Return a list of invariant violations; empty iff the topology is valid."""
    problems: list[str] = []
    ids: set[str] = set()
    for element in (*topology.nodes, *topology.links):
        if element.id in ids:
            problems.append(f"duplicate id {element.id}")
        ids.add(element.id)

    for n in topology.nodes:
        if not 0.0 <= n.trust_weight <= 1.0:
            problems.append(f"node {n.id}: trust_weight {n.trust_weight} outside [0, 1]")
    for l in topology.links:
        a, b = l.endpoints
        for e in (a, b):
            if not topology.has_node(e):
                problems.append(f"link {l.id}: unknown node id {e}")
        if a == b:
            problems.append(f"link {l.id}: endpoints must be distinct")
        if not 0.0 <= l.compromise_prob <= 1.0:
            problems.append(f"link {l.id}: compromise_prob {l.compromise_prob} outside [0, 1]")
        for name in ("length_km", "loss_db_per_km", "rtt_ms"):
            value = getattr(l, name)
            if value is not None and value < 0:
                problems.append(f"link {l.id}: {name} must be nonnegative")

    ends_ok = True
    for name in ("alice", "bob"):
        ref = getattr(topology, name)
        if not topology.has_node(ref):
            problems.append(f"{name} {ref} is not a node")
            ends_ok = False
        elif topology.node(ref).kind is not NodeKind.END_USER:
            problems.append(f"{name} {ref} must be an EndUser")
    if topology.alice == topology.bob:
        problems.append("alice and bob must differ")
    elif ends_ok and topology.bob not in _reachable(topology, topology.alice):
        problems.append("no path alice→bob")
    return problems
