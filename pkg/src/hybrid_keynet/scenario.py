"""Scenario documents: what to run against a topology."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .protocols import ProtocolConfig
from .rate_models import KemRateParams, QkdRateParams, RateConfig, kem_params_from_dict, qkd_params_from_dict

SCENARIO_KEYS = {"rates", "protocol", "rate_options", "crossover", "length_bits", "seed", "analysis"}


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class RateOption:
    name: str
    protocol: ProtocolConfig


@dataclass(frozen=True)
class Scenario:
    rates: RateConfig = field(default_factory=RateConfig)
    protocol: ProtocolConfig | None = None
    rate_options: tuple[RateOption, ...] = ()
    crossover: tuple[tuple[QkdRateParams, KemRateParams], ...] = ()
    length_bits: int = 128
    seed: int | None = None
    access_structures: bool = True
    break_probability: bool = True

    def options(self) -> tuple[RateOption, ...]:
        """Protocol options to rate; falls back to the scenario's own protocol."""
        if self.rate_options:
            return self.rate_options
        if self.protocol is not None:
            return (RateOption(self.protocol.kind, self.protocol),)
        return ()


def parse_scenario(text: str) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario syntax error at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ScenarioError("scenario must be a JSON object")
    unknown = set(doc) - SCENARIO_KEYS
    if unknown:
        raise ScenarioError(f"scenario: unknown keys {sorted(unknown)}")
    try:
        analysis = doc.get("analysis", {})
        if set(analysis) - {"access_structures", "break_probability"}:
            raise ScenarioError(f"analysis: unknown keys {sorted(set(analysis))}")
        length_bits = int(doc.get("length_bits", 128))
        if length_bits <= 0:
            raise ScenarioError("length_bits must be positive")
        seed = doc.get("seed")
        if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int)):
            raise ScenarioError("seed must be an integer")
        return Scenario(
            rates=RateConfig.from_dict(doc.get("rates")),
            protocol=ProtocolConfig.from_dict(doc["protocol"]) if "protocol" in doc else None,
            rate_options=tuple(
                RateOption(str(o["name"]), ProtocolConfig.from_dict(o["protocol"])) for o in doc.get("rate_options", [])
            ),
            crossover=tuple(
                (qkd_params_from_dict(c["qkd"]), kem_params_from_dict(c["kem"])) for c in doc.get("crossover", [])
            ),
            length_bits=length_bits,
            seed=seed,
            access_structures=bool(analysis.get("access_structures", True)),
            break_probability=bool(analysis.get("break_probability", True)),
        )
    except ScenarioError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"invalid scenario: {exc}") from None
