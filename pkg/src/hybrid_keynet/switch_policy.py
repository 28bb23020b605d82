"""Quantum-classical switch: threat events drive per-link mechanism changes.

Risk is a scalar per mechanism label. Events add a severity weight and every
score decays with a configurable half-life. Each link climbs a ladder of
protective responses driven by the risk of the algorithm it was deployed
with:

    level 0  PQC, standard key size
    level 1  PQC, extended key size         (risk >= t_extend)
    level 2  migrate to another PQC family  (risk >= t_migrate; alert if none)
    level 3  QKD or hybrid XOR              (risk >= t_quantum; needs a Qkd sibling)

A rung is left only once risk falls below its threshold minus the hysteresis
margin. Between events, scores decay deterministically, so the time a score
crosses a release threshold is computed exactly and logged as such.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

from .topology import LinkKind, NetworkTopology

DAY = 86400.0


class Severity(str, Enum):
    ADVISORY = "Advisory"
    SUSPECTED = "Suspected"
    DEMONSTRATED = "Demonstrated"


DEFAULT_WEIGHTS = {Severity.ADVISORY: 0.2, Severity.SUSPECTED: 0.5, Severity.DEMONSTRATED: 1.0}


@dataclass(frozen=True)
class ThreatEvent:
    event_id: str
    target: str
    severity: Severity
    model_time: float
    note: str = ""

    def __post_init__(self) -> None:
        if not self.target:
            raise ValueError(f"event {self.event_id}: target must be nonempty")
        object.__setattr__(self, "severity", Severity(self.severity))

    @classmethod
    def from_dict(cls, obj: Mapping) -> ThreatEvent:
        allowed = {"event_id", "target", "severity", "model_time", "note"}
        if set(obj) - allowed:
            raise ValueError(f"event: unknown keys {sorted(set(obj) - allowed)}")
        missing = allowed - {"note"} - set(obj)
        if missing:
            raise ValueError(f"event: missing {sorted(missing)}")
        return cls(str(obj["event_id"]), obj["target"], Severity(obj["severity"]), float(obj["model_time"]),
                   obj.get("note", ""))

    def to_dict(self) -> dict:
        return {
            "event_id": self.event_id,
            "target": self.target,
            "severity": self.severity.value,
            "model_time": self.model_time,
            "note": self.note,
        }


def parse_events(text: str) -> list[ThreatEvent]:
    """One JSON object per line; blank lines are ignored."""
    events = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValueError(f"events line {lineno}: {exc.msg}") from None
        events.append(ThreatEvent.from_dict(obj))
    return events


@dataclass(frozen=True)
class SwitchThresholds:
    t_extend: float = 0.25
    t_migrate: float = 0.6
    t_quantum: float = 0.9
    hysteresis: float = 0.05

    def __post_init__(self) -> None:
        if not 0 < self.t_extend < self.t_migrate < self.t_quantum <= 1:
            raise ValueError("thresholds must satisfy 0 < t_extend < t_migrate < t_quantum <= 1")
        if self.hysteresis <= 0:
            raise ValueError("hysteresis margin must be positive")

    def rung(self, level: int) -> float:
        return (self.t_extend, self.t_migrate, self.t_quantum)[level - 1]


@dataclass(frozen=True)
class SwitchConfig:
    thresholds: SwitchThresholds = field(default_factory=SwitchThresholds)
    weights: Mapping[Severity, float] = field(default_factory=lambda: dict(DEFAULT_WEIGHTS))
    half_life_s: float | None = 30 * DAY
    quantum_mode: str = "qkd"
    qkd_label: str = "qkd-detector"
    # None: alternatives are the algorithm labels deployed in the topology
    pqc_families: tuple[str, ...] | None = None
    # tie-break among equally risky alternatives; hash-based first by default
    pqc_preference: tuple[str, ...] = ("hash-dsa", "lattice-kem")
    horizon: float | None = None

    def __post_init__(self) -> None:
        if self.quantum_mode not in ("qkd", "hybrid-xor"):
            raise ValueError("quantum_mode must be 'qkd' or 'hybrid-xor'")

    @classmethod
    def from_dict(cls, obj: Mapping | None) -> SwitchConfig:
        if not obj:
            return cls()
        obj = dict(obj)
        allowed = {"thresholds", "weights", "half_life_s", "quantum_mode", "qkd_label", "pqc_families",
                   "pqc_preference", "horizon"}
        if set(obj) - allowed:
            raise ValueError(f"switch config: unknown keys {sorted(set(obj) - allowed)}")
        if "thresholds" in obj:
            obj["thresholds"] = SwitchThresholds(**obj["thresholds"])
        if "weights" in obj:
            weights = dict(DEFAULT_WEIGHTS)
            weights.update({Severity(k): float(v) for k, v in obj["weights"].items()})
            obj["weights"] = weights
        for key in ("pqc_families", "pqc_preference"):
            if obj.get(key) is not None:
                obj[key] = tuple(obj[key])
        return cls(**obj)


@dataclass(frozen=True)
class Transition:
    link_id: str
    from_: str
    to: str
    reason: str
    model_time: float
    # not serialized: which rung moved, in which direction, at what driver risk
    rung: int = field(default=0, compare=False)
    direction: int = field(default=0, compare=False)
    risk: float = field(default=0.0, compare=False)

    def to_dict(self) -> dict:
        return {
            "link_id": self.link_id,
            "from": self.from_,
            "to": self.to,
            "reason": self.reason,
            "model_time": self.model_time,
        }


@dataclass
class LinkState:
    link_id: str
    base_label: str
    is_qkd: bool
    max_level: int
    level: int = 0
    alternative: str | None = None
    alerted: bool = False

    def mechanism(self, quantum_mode: str = "qkd") -> str:
        tier = "extended" if self.level >= 1 else "standard"
        if self.is_qkd:
            return f"qkd/{tier}"
        if self.level >= 3:
            return f"{quantum_mode}/{tier}"
        if self.level == 2 and self.alternative:
            return f"pqc:{self.alternative}/{tier}"
        return f"pqc:{self.base_label}/{tier}"


@dataclass
class SwitchState:
    links: dict[str, LinkState]
    risk: dict[str, float] = field(default_factory=dict)
    time: float = 0.0
    history: list[Transition] = field(default_factory=list)
    unknown_targets: list[str] = field(default_factory=list)
    known_labels: frozenset[str] = frozenset()

    def mechanisms(self, quantum_mode: str = "qkd") -> dict[str, str]:
        return {lid: ls.mechanism(quantum_mode) for lid, ls in self.links.items()}

    def levels(self) -> dict[str, int]:
        return {lid: ls.level for lid, ls in self.links.items()}


def _has_qkd_sibling(topology: NetworkTopology, link_id: str) -> bool:
    ends = set(topology.link(link_id).endpoints)
    return any(l.kind is LinkKind.QKD and set(l.endpoints) == ends for l in topology.links)


def initial_state(topology: NetworkTopology, config: SwitchConfig | None = None) -> SwitchState:
    config = config or SwitchConfig()
    links = {}
    for l in topology.links:
        if l.kind is LinkKind.QKD:
            links[l.id] = LinkState(l.id, config.qkd_label, True, 1)
        else:
            top = 3 if _has_qkd_sibling(topology, l.id) else 2
            links[l.id] = LinkState(l.id, l.algorithm_label, False, top)
    known = {ls.base_label for ls in links.values()} | set(config.pqc_families or ())
    return SwitchState(links=links, known_labels=frozenset(known | {config.qkd_label}))


def decay_factor(dt: float, half_life_s: float | None) -> float:
    if not half_life_s:
        return 1.0
    return 2.0 ** (-dt / half_life_s)


def _decayed(risk: Mapping[str, float], dt: float, config: SwitchConfig) -> dict[str, float]:
    f = decay_factor(dt, config.half_life_s)
    return {label: r * f for label, r in risk.items()}


def assess_risk(state: SwitchState, event: ThreatEvent, config: SwitchConfig | None = None) -> dict[str, float]:
    """Scores at ``event.model_time``: decay everything, then bump the target.

    Unknown targets are recorded on the state and get a fresh entry.
    """
    config = config or SwitchConfig()
    risk = _decayed(state.risk, event.model_time - state.time, config)
    if event.target not in state.known_labels and event.target not in state.unknown_targets:
        state.unknown_targets.append(event.target)
    risk[event.target] = min(1.0, risk.get(event.target, 0.0) + config.weights[event.severity])
    return risk


def _alternatives(state: SwitchState, topology: NetworkTopology, config: SwitchConfig, base: str) -> list[str]:
    if config.pqc_families is not None:
        families = set(config.pqc_families)
    else:
        families = {l.algorithm_label for l in topology.links if l.kind is LinkKind.KEM}
    families.discard(base)
    pref = {label: i for i, label in enumerate(config.pqc_preference)}
    return sorted(families, key=lambda a: (state.risk.get(a, 0.0), pref.get(a, len(pref)), a))


def _enter_level_two(ls: LinkState, state, topology, config, r: float, why: str) -> tuple[str, str]:
    t = config.thresholds
    for alt in _alternatives(state, topology, config, ls.base_label):
        if state.risk.get(alt, 0.0) < t.t_migrate:
            ls.alternative, ls.alerted = alt, False
            return f"{why}; migrate to {alt} (risk {state.risk.get(alt, 0.0):.4f})", alt
    ls.alternative, ls.alerted = None, True
    return f"{why}; alert: no alternative PQC family below {t.t_migrate} for {ls.base_label}", ""


def _step(ls: LinkState, direction: int, state: SwitchState, topology, config: SwitchConfig, r: float) -> Transition:
    t = config.thresholds
    before = ls.mechanism(config.quantum_mode)
    label = ls.base_label
    if direction > 0:
        rung = ls.level + 1
        why = f"risk[{label}]={r:.4f} >= {t.rung(rung)}"
        ls.level = rung
        if rung == 1:
            reason = f"extend: {why}"
        elif rung == 2:
            reason, _ = _enter_level_two(ls, state, topology, config, r, f"migrate: {why}")
        else:
            reason = f"quantum: {why}; switch to {config.quantum_mode}"
    else:
        rung = ls.level
        why = f"risk[{label}] < {t.rung(rung) - t.hysteresis:.4f}"
        ls.level = rung - 1
        if rung == 3:
            reason, _ = _enter_level_two(ls, state, topology, config, r, f"revert-quantum: {why}")
        elif rung == 2:
            ls.alternative, ls.alerted = None, False
            reason = f"revert-migrate: {why}; back to {label}"
        else:
            reason = f"revert-extend: {why}"
    return Transition(ls.link_id, before, ls.mechanism(config.quantum_mode), reason, state.time, rung, direction, r)


def decide_switch(state: SwitchState, topology: NetworkTopology, config: SwitchConfig | None = None) -> list[Transition]:
    """Move every link to the level its current driver risk calls for.

    Applies the moves to ``state`` and appends them to its history.
    """
    config = config or SwitchConfig()
    t = config.thresholds
    out: list[Transition] = []
    for ls in state.links.values():
        r = state.risk.get(ls.base_label, 0.0)
        up = max((k for k in range(1, ls.max_level + 1) if r >= t.rung(k)), default=0)
        if up > ls.level:
            while ls.level < up:
                out.append(_step(ls, +1, state, topology, config, r))
        else:
            while ls.level > 0 and r < t.rung(ls.level) - t.hysteresis:
                out.append(_step(ls, -1, state, topology, config, r))
    state.history.extend(out)
    return out


def _next_release(state: SwitchState, config: SwitchConfig) -> tuple[float, list[LinkState]] | None:
    """Earliest time some link's driver risk decays to its release threshold."""
    t = config.thresholds
    best: float | None = None
    due: list[LinkState] = []
    for ls in state.links.values():
        if ls.level == 0:
            continue
        release = t.rung(ls.level) - t.hysteresis
        if release <= 0:
            continue
        r = state.risk.get(ls.base_label, 0.0)
        if r < release:
            when = state.time
        elif not config.half_life_s:
            continue
        else:
            when = state.time + config.half_life_s * math.log2(r / release)
        if best is None or when < best:
            best, due = when, [ls]
        elif when == best:
            due.append(ls)
    return None if best is None else (best, due)


def advance(state: SwitchState, topology: NetworkTopology, until: float, config: SwitchConfig | None = None) -> list[Transition]:
    """Let risk decay up to ``until``, releasing rungs at their exact crossing times."""
    config = config or SwitchConfig()
    t = config.thresholds
    out: list[Transition] = []
    while True:
        nxt = _next_release(state, config)
        if nxt is None or nxt[0] > until:
            break
        when, due = nxt
        state.risk = _decayed(state.risk, when - state.time, config)
        state.time = when
        for ls in due:
            out.append(_step(ls, -1, state, topology, config, t.rung(ls.level) - t.hysteresis))
    state.risk = _decayed(state.risk, until - state.time, config)
    state.time = until
    state.history.extend(out)
    return out


def replay(events: Sequence[ThreatEvent], topology: NetworkTopology, config: SwitchConfig | None = None) -> SwitchState:
    """Fold the event stream through risk assessment and switching decisions."""
    config = config or SwitchConfig()
    times = [e.model_time for e in events]
    if any(b < a for a, b in zip(times, times[1:])):
        raise ValueError("events not sorted by model_time")
    state = initial_state(topology, config)
    if events:
        state.time = events[0].model_time
    for ev in events:
        advance(state, topology, ev.model_time, config)
        state.risk = assess_risk(state, ev, config)
        decide_switch(state, topology, config)
    if config.horizon is not None and config.horizon > state.time:
        advance(state, topology, config.horizon, config)
    return state


def transitions_to_jsonl(transitions: Iterable[Transition]) -> str:
    return "".join(json.dumps(tr.to_dict()) + "\n" for tr in transitions)
