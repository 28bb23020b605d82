"""Report sections. Every builder returns plain JSON-ready data in a fixed shape."""

from __future__ import annotations

import dataclasses
import hashlib
import json

from . import __version__
from .access_analysis import AccessStructureSet, BreakAnalysis
from .protocols import SessionResult, protocol_rate
from .rate_models import (
    FIBER_RTT_MS_PER_KM,
    KemRateParams,
    QkdRateParams,
    crossover_distance,
    crossover_reason,
    kem_rate,
    link_rates,
    qkd_rate,
)
from .scenario import Scenario
from .switch_policy import SwitchConfig, SwitchState
from .topology import NetworkTopology, ProtocolMode

SCHEMA_VERSION = "1.0"


def digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def envelope(command: str, inputs: dict[str, bytes]) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "command": command,
        "inputs": {f"{name}_sha256": digest(data) for name, data in inputs.items()},
        "warnings": [],
    }


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def rates_section(topology: NetworkTopology, scenario: Scenario) -> dict:
    rates = link_rates(topology, scenario.rates)
    options = []
    for opt in scenario.options():
        options.append({"name": opt.name, "protocol": opt.protocol.to_dict(),
                        "rate_bps": protocol_rate(topology, opt.protocol, rates)})
    fastest = None
    if options:
        best = max(o["rate_bps"] for o in options)
        fastest = next(o["name"] for o in options if o["rate_bps"] == best)
    crossings = []
    for i, (qkd, kem) in enumerate(scenario.crossover):
        crossings.append({
            "index": i,
            "distance_km": crossover_distance(qkd, kem),
            "kem_rate_bps": kem_rate(kem),
            "reason": crossover_reason(qkd, kem),
        })
    return {
        "link_rates": [{"link_id": l.id, "kind": l.kind.value, "rate_bps": rates[l.id]} for l in topology.links],
        "options": options,
        "fastest_option": fastest,
        "crossover": crossings,
        "rate_defaults": scenario.rates.to_dict(),
        "defaults_illustrative": True,
    }


def sweep_templates(scenario: Scenario) -> tuple[QkdRateParams, KemRateParams]:
    if scenario.crossover:
        return scenario.crossover[0]
    cfg = scenario.rates
    qkd = QkdRateParams(cfg.qkd_source_rate_hz, cfg.qkd_protocol_efficiency, 0.2,
                        cutoff_rate_hz=cfg.qkd_cutoff_rate_hz)
    kem = KemRateParams(min(cfg.handshakes_per_sec.values()), cfg.kem_bits_per_handshake,
                        bandwidth_bits_per_sec=cfg.kem_bandwidth_bits_per_sec)
    return qkd, kem


SWEEP_COLUMNS = ("distance_km", "qkd_repeaterless_bps", "qkd_twinfield_bps", "kem_bps")


def sweep_rows(scenario: Scenario, start: float, stop: float, step: float) -> list[dict]:
    """Rate versus distance; the KEM column gains fiber round-trip latency."""
    qkd, kem = sweep_templates(scenario)
    count = int(round((stop - start) / step)) + 1
    rows = []
    for i in range(count):
        d = start + i * step
        rows.append({
            "distance_km": d,
            "qkd_repeaterless_bps": qkd_rate(dataclasses.replace(qkd, length_km=d, protocol_mode=ProtocolMode.REPEATERLESS)),
            "qkd_twinfield_bps": qkd_rate(dataclasses.replace(qkd, length_km=d, protocol_mode=ProtocolMode.TWIN_FIELD)),
            "kem_bps": kem_rate(dataclasses.replace(kem, rtt_ms=kem.rtt_ms + d * FIBER_RTT_MS_PER_KM)),
        })
    return rows


def sweep_csv(rows: list[dict]) -> str:
    lines = [",".join(SWEEP_COLUMNS)]
    lines += [",".join(repr(float(r[c])) for c in SWEEP_COLUMNS) for r in rows]
    return "\n".join(lines) + "\n"


def session_section(result: SessionResult, seed: int, reveal: bool) -> dict:
    transcript = result.transcript_bytes()
    out = {
        "status": "ok",
        "protocol": result.protocol,
        "length_bits": result.alice_key.length_bits,
        "seed": seed,
        "keys_match": result.keys_match,
        "elapsed_model_time_s": result.elapsed_model_time,
        "transcript_messages": len(result.transcript),
        "transcript_bytes": len(transcript),
        "transcript_sha256": digest(transcript),
        "delivered_channels": list(result.delivered),
        "bits_drawn": dict(result.bits_drawn),
        "secrets_revealed": reveal,
    }
    if reveal:
        out["alice_key"] = result.alice_key.hex()
        out["bob_key"] = result.bob_key.hex()
        out["link_keys"] = {k: [key.hex() for key in v] for k, v in sorted(result.link_keys.items())}
        out["channel_keys"] = {k: v.hex() for k, v in sorted(result.channel_keys.items())}
        out["transcript"] = [
            {"sender": m.sender, "kind": m.kind, "channel": m.channel, "payload": m.payload.hex()}
            for m in result.transcript
        ]
    return out


def access_section(formula, structures: AccessStructureSet, analysis: BreakAnalysis | None) -> dict:
    out = {
        "formula": str(formula),
        "minimal_sets": [list(s) for s in structures.minimal_sets],
        "criticality": [{"element": e, "count": c} for e, c in structures.ranking()],
    }
    if analysis is not None:
        out["break_probability"] = analysis.probability
        out["most_critical"] = analysis.most_critical
    return out


def switch_section(state: SwitchState, config: SwitchConfig) -> dict:
    return {
        "transitions": [tr.to_dict() for tr in state.history],
        "final_mechanisms": state.mechanisms(config.quantum_mode),
        "final_levels": state.levels(),
        "final_risk": dict(sorted(state.risk.items())),
        "final_time": state.time,
        "alerts": sum("alert:" in tr.reason for tr in state.history),
        "unknown_targets": list(state.unknown_targets),
    }
