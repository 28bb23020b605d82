"""Which compromise sets reveal the final key, and how likely that is.

A protocol deployment translates into a monotone formula over network
elements (links and relay nodes). Its inclusion-minimal satisfying sets are
the minimal access structures; counting how many of them contain each
element ranks the weakest parts of the network.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping

import numpy as np

from .protocols import PARALLEL_SECRET_SHARING, PARALLEL_XOR, SERIES, Channel, ProtocolConfig
from .topology import NetworkTopology

DEFAULT_MAX_LEAVES = 24
MAX_EXACT_ELEMENTS = 20
MAX_LEAVES_ENV = "HYBRID_KEYNET_MAX_LEAVES"


class LeafBoundExceeded(ValueError):
    pass


class ElementBoundExceeded(ValueError):
    pass


@dataclass(frozen=True)
class Leaf:
    id: str

    def __str__(self) -> str:
        return self.id


@dataclass(frozen=True)
class And:
    children: tuple

    def __post_init__(self) -> None:
        if not self.children:
            raise ValueError("AND needs at least one child")

    def __str__(self) -> str:
        return "AND(" + ",".join(map(str, self.children)) + ")"


@dataclass(frozen=True)
class Or:
    children: tuple

    def __post_init__(self) -> None:
        if not self.children:
            raise ValueError("OR needs at least one child")

    def __str__(self) -> str:
        return "OR(" + ",".join(map(str, self.children)) + ")"


@dataclass(frozen=True)
class Threshold:
    t: int
    children: tuple

    def __post_init__(self) -> None:
        if not 1 <= self.t <= len(self.children):
            raise ValueError(f"THRESHOLD needs 1 <= t <= {len(self.children)}, got {self.t}")

    def __str__(self) -> str:
        return f"THRESHOLD({self.t}," + ",".join(map(str, self.children)) + ")"


AccessFormula = Leaf | And | Or | Threshold


def leaves(formula: AccessFormula) -> list[str]:
    """Leaf ids in tree order, with repetitions."""
    if isinstance(formula, Leaf):
        return [formula.id]
    return [x for c in formula.children for x in leaves(c)]


def elements(formula: AccessFormula) -> list[str]:
    return sorted(set(leaves(formula)))


def check_leaves(formula: AccessFormula, topology: NetworkTopology) -> list[str]:
    """Leaf ids that name no link or node of ``topology``."""
    return [e for e in elements(formula) if not (topology.has_link(e) or topology.has_node(e))]


def channel_formula(topology: NetworkTopology, channel: Channel) -> AccessFormula:
    """Any single link or relay node of a relayed channel exposes its key."""
    relays = topology.walk(channel.path)[1:-1]
    items = tuple(Leaf(x) for x in (*channel.path, *relays))
    return items[0] if len(items) == 1 else Or(items)


def derive_access_formula(topology: NetworkTopology, config: ProtocolConfig) -> AccessFormula:
    parts = tuple(channel_formula(topology, ch) for ch in config.channels)
    if config.kind == SERIES:
        return parts[0]
    if config.kind == PARALLEL_XOR:
        return And(parts)
    if config.kind == PARALLEL_SECRET_SHARING:
        return Threshold(config.t, parts)
    raise ValueError(f"unknown protocol kind {config.kind!r}")


def evaluate(formula: AccessFormula, compromised: Iterable[str]) -> bool:
    compromised = compromised if isinstance(compromised, (set, frozenset)) else set(compromised)
    return _eval(formula, compromised)


def _eval(f: AccessFormula, s) -> bool:
    if isinstance(f, Leaf):
        return f.id in s
    if isinstance(f, And):
        return all(_eval(c, s) for c in f.children)
    if isinstance(f, Or):
        return any(_eval(c, s) for c in f.children)
    return sum(_eval(c, s) for c in f.children) >= f.t


def _absorb(sets: Iterable[frozenset]) -> list[frozenset]:
    kept: list[frozenset] = []
    for s in sorted(set(sets), key=len):
        if not any(k <= s for k in kept):
            kept.append(s)
    return kept


def _product(families: Iterable[list[frozenset]]) -> list[frozenset]:
    acc = [frozenset()]
    for fam in families:
        acc = _absorb(a | b for a in acc for b in fam)
    return acc


def _minimal(f: AccessFormula) -> list[frozenset]:
    if isinstance(f, Leaf):
        return [frozenset([f.id])]
    kids = [_minimal(c) for c in f.children]
    if isinstance(f, Or):
        return _absorb(s for fam in kids for s in fam)
    if isinstance(f, And):
        return _product(kids)
    return _absorb(s for combo in combinations(kids, f.t) for s in _product(combo))


def canonical_order(sets: Iterable[Iterable[str]]) -> tuple[tuple[str, ...], ...]:
    return tuple(sorted((tuple(sorted(s)) for s in sets), key=lambda s: (len(s), s)))


def default_max_leaves() -> int:
    value = os.environ.get(MAX_LEAVES_ENV)
    return int(value) if value else DEFAULT_MAX_LEAVES


@dataclass(frozen=True)
class AccessStructureSet:
    minimal_sets: tuple[tuple[str, ...], ...]
    element_criticality: Mapping[str, int] = field(default_factory=dict)
    break_probability: float | None = None

    def ranking(self) -> list[tuple[str, int]]:
        """Elements by descending criticality, ties broken by id."""
        return sorted(self.element_criticality.items(), key=lambda kv: (-kv[1], kv[0]))


def minimal_access_structures(formula: AccessFormula, max_leaves: int | None = None) -> AccessStructureSet:
    bound = default_max_leaves() if max_leaves is None else max_leaves
    count = len(leaves(formula))
    if count > bound:
        raise LeafBoundExceeded(
            f"formula has {count} leaves, above the exact-enumeration bound of {bound} "
            f"(raise {MAX_LEAVES_ENV} or use a Monte Carlo estimate)"
        )
    sets = canonical_order(_minimal(formula))
    criticality = {e: sum(e in s for s in sets) for e in elements(formula)}
    return AccessStructureSet(sets, criticality)


@dataclass(frozen=True)
class BreakAnalysis:
    probability: float
    element_criticality: Mapping[str, int]
    most_critical: str | None


def break_probability(
    structures: AccessStructureSet,
    topology: NetworkTopology | None = None,
    probs: Mapping[str, float] | None = None,
) -> BreakAnalysis:
    """Exact probability that independent element compromises reveal the key.

    Per-element probabilities come from ``probs`` if given, otherwise from
    the topology (links: ``compromise_prob``; nodes: ``1 - trust_weight``).
    """
    involved = sorted({e for s in structures.minimal_sets for e in s})
    if len(involved) > MAX_EXACT_ELEMENTS:
        raise ElementBoundExceeded(
            f"{len(involved)} elements exceed the exact-mode limit of {MAX_EXACT_ELEMENTS}"
        )
    if probs is None:
        if topology is None:
            raise ValueError("need a topology or explicit probabilities")
        probs = {e: topology.compromise_prob(e) for e in involved}
    bit = {e: i for i, e in enumerate(involved)}
    masks = np.arange(1 << len(involved), dtype=np.int64)
    satisfied = np.zeros(masks.shape, dtype=bool)
    for s in structures.minimal_sets:
        m = sum(1 << bit[e] for e in s)
        satisfied |= (masks & m) == m
    weight = np.ones(masks.shape)
    for e, i in bit.items():
        p = float(probs[e])
        weight *= np.where((masks >> i) & 1, p, 1.0 - p)
    probability = float(weight[satisfied].sum())
    ranking = structures.ranking()
    most = ranking[0][0] if ranking and ranking[0][1] > 0 else None
    return BreakAnalysis(probability, dict(structures.element_criticality), most)
