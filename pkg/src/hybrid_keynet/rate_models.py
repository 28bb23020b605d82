"""Phenomenological key-rate curves for QKD and KEM links.

QKD rates fall off with channel transmittance (linearly for repeaterless
links, as its square root for twin-field links). KEM rates are bounded by
handshake throughput, round-trip latency, and bandwidth. The numbers shipped
in :class:`RateConfig` are illustrative defaults, not measured values.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .topology import ComputeTier, Link, LinkKind, NetworkTopology, ProtocolMode

CROSSOVER_MAX_KM = 1e5
CROSSOVER_REL_TOL = 1e-9
# round trip over fiber at ~2e5 km/s
FIBER_RTT_MS_PER_KM = 0.01


@dataclass(frozen=True)
class QkdRateParams:
    source_rate_hz: float
    protocol_efficiency: float
    loss_db_per_km: float
    length_km: float = 0.0
    protocol_mode: ProtocolMode = ProtocolMode.REPEATERLESS
    cutoff_rate_hz: float = 0.0

    def __post_init__(self) -> None:
        for name in ("source_rate_hz", "loss_db_per_km", "length_km", "cutoff_rate_hz"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if not 0.0 < self.protocol_efficiency <= 1.0:
            raise ValueError("protocol_efficiency must lie in (0, 1]")


@dataclass(frozen=True)
class KemRateParams:
    handshakes_per_sec: float
    bits_per_handshake: float
    rtt_ms: float = 0.0
    bandwidth_bits_per_sec: float = math.inf

    def __post_init__(self) -> None:
        for f in dataclasses.fields(self):
            if getattr(self, f.name) < 0:
                raise ValueError(f"{f.name} must be nonnegative")


RateParams = QkdRateParams | KemRateParams


def transmittance(loss_db_per_km: float, length_km: float) -> float:
    return 10.0 ** (-loss_db_per_km * length_km / 10.0)


def qkd_rate(params: QkdRateParams) -> float:
    """Secret-key rate in bits/s; zero once the rate drops below the cutoff."""
    eta = transmittance(params.loss_db_per_km, params.length_km)
    if params.protocol_mode is ProtocolMode.TWIN_FIELD:
        eta = math.sqrt(eta)
    rate = params.source_rate_hz * params.protocol_efficiency * eta
    return 0.0 if rate < params.cutoff_rate_hz else rate


def kem_rate(params: KemRateParams) -> float:
    """Symmetric-key bits/s from encapsulations, latency- and bandwidth-bound."""
    h = params.handshakes_per_sec
    compute_bound = h * params.bits_per_handshake / (1.0 + h * params.rtt_ms / 1000.0)
    return min(compute_bound, params.bandwidth_bits_per_sec)


def rate(params: RateParams) -> float:
    if isinstance(params, QkdRateParams):
        return qkd_rate(params)
    return kem_rate(params)


@dataclass(frozen=True)
class RateConfig:
    """Defaults used to turn topology links into rate parameters."""

    qkd_source_rate_hz: float = 1e8
    qkd_protocol_efficiency: float = 0.01
    qkd_cutoff_rate_hz: float = 1.0
    kem_bits_per_handshake: float = 256.0
    kem_bandwidth_bits_per_sec: float = 1e9
    handshakes_per_sec: Mapping[ComputeTier, float] = field(
        default_factory=lambda: {ComputeTier.LIMITED: 1e2, ComputeTier.HIGH_PERFORMANCE: 1e5}
    )

    @classmethod
    def from_dict(cls, overrides: Mapping | None) -> RateConfig:
        """Build from a scenario ``rates`` section: ``{"qkd": {...}, "kem": {...}}``."""
        if not overrides:
            return cls()
        unknown = set(overrides) - {"qkd", "kem"}
        if unknown:
            raise ValueError(f"rates: unknown keys {sorted(unknown)}")
        kwargs: dict = {}
        qkd = dict(overrides.get("qkd", {}))
        for key in ("source_rate_hz", "protocol_efficiency", "cutoff_rate_hz"):
            if key in qkd:
                kwargs[f"qkd_{key}"] = float(qkd.pop(key))
        if qkd:
            raise ValueError(f"rates.qkd: unknown keys {sorted(qkd)}")
        kem = dict(overrides.get("kem", {}))
        for key in ("bits_per_handshake", "bandwidth_bits_per_sec"):
            if key in kem:
                kwargs[f"kem_{key}"] = float(kem.pop(key))
        if "handshakes_per_sec" in kem:
            tiers = dict(cls().handshakes_per_sec)
            for tier, value in kem.pop("handshakes_per_sec").items():
                tiers[ComputeTier(tier)] = float(value)
            kwargs["handshakes_per_sec"] = tiers
        if kem:
            raise ValueError(f"rates.kem: unknown keys {sorted(kem)}")
        return cls(**kwargs)

    def to_dict(self) -> dict:
        return {
            "qkd": {
                "source_rate_hz": self.qkd_source_rate_hz,
                "protocol_efficiency": self.qkd_protocol_efficiency,
                "cutoff_rate_hz": self.qkd_cutoff_rate_hz,
            },
            "kem": {
                "bits_per_handshake": self.kem_bits_per_handshake,
                "bandwidth_bits_per_sec": self.kem_bandwidth_bits_per_sec,
                "handshakes_per_sec": {t.value: v for t, v in sorted(self.handshakes_per_sec.items())},
            },
        }


def link_rate_params(topology: NetworkTopology, link: Link, config: RateConfig | None = None) -> RateParams:
    config = config or RateConfig()
    if link.kind is LinkKind.QKD:
        return QkdRateParams(
            source_rate_hz=config.qkd_source_rate_hz,
            protocol_efficiency=config.qkd_protocol_efficiency,
            loss_db_per_km=link.loss_db_per_km,
            length_km=link.length_km,
            protocol_mode=link.protocol_mode,
            cutoff_rate_hz=config.qkd_cutoff_rate_hz,
        )
    # both endpoints run the KEM; the slower one bounds the handshake rate
    handshakes = min(config.handshakes_per_sec[topology.node(e).compute_tier] for e in link.endpoints)
    return KemRateParams(
        handshakes_per_sec=handshakes,
        bits_per_handshake=config.kem_bits_per_handshake,
        rtt_ms=link.rtt_ms,
        bandwidth_bits_per_sec=config.kem_bandwidth_bits_per_sec,
    )


def link_rates(topology: NetworkTopology, config: RateConfig | None = None) -> dict[str, float]:
    return {l.id: rate(link_rate_params(topology, l, config)) for l in topology.links}


def end_to_end_rate(
    topology: NetworkTopology,
    path: Sequence[str],
    params: Mapping[str, RateParams],
) -> float:
    """Rate of a relayed key along ``path``: the slowest segment wins."""
    topology.walk(path)
    return min(rate(params[link_id]) for link_id in path)


def crossover_distance(qkd: QkdRateParams, kem: KemRateParams) -> float | None:
    """Distance where the QKD rate falls to the (distance-independent) KEM rate.

    Returns None when KEM already matches QKD at zero distance, or when QKD
    still beats KEM at ``CROSSOVER_MAX_KM``.
    """
    target = kem_rate(kem)

    def qkd_at(length_km: float) -> float:
        return qkd_rate(dataclasses.replace(qkd, length_km=length_km))

    if qkd_at(0.0) <= target or qkd_at(CROSSOVER_MAX_KM) > target:
        return None
    lo, hi = 0.0, CROSSOVER_MAX_KM
    while hi - lo > CROSSOVER_REL_TOL * hi:
        mid = 0.5 * (lo + hi)
        if qkd_at(mid) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def crossover_reason(qkd: QkdRateParams, kem: KemRateParams) -> str | None:
    """Explain a ``None`` crossover; returns None when a crossover exists."""
    target = kem_rate(kem)
    if qkd_rate(dataclasses.replace(qkd, length_km=0.0)) <= target:
        return "kem rate already meets or exceeds the zero-distance qkd rate"
    if qkd_rate(dataclasses.replace(qkd, length_km=CROSSOVER_MAX_KM)) > target:
        return f"no crossover within {CROSSOVER_MAX_KM:g} km"
    return None


def qkd_params_from_dict(obj: Mapping) -> QkdRateParams:
    obj = dict(obj)
    if "protocol_mode" in obj:
        obj["protocol_mode"] = ProtocolMode(obj["protocol_mode"])
    return QkdRateParams(**obj)


def kem_params_from_dict(obj: Mapping) -> KemRateParams:
    return KemRateParams(**obj)
