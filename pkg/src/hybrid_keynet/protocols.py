"""Key-distribution protocols executed between simulated parties.

Each link acts as a pairwise symmetric-key oracle fed by its own seeded
stream. Relays publish XORs of adjacent segment keys; parallel schemes
combine several alice-to-bob channels either by XOR or by threshold
secret sharing with one-time-pad transport. Time is model time derived from
link rates, never wall-clock.

Key consumption order is part of the contract (desk-scale analyses replay
it): channels in the given order, links in path order, and for secret
sharing alice draws the final key and then the polynomial coefficients from
her own stream before any channel key is requested.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Mapping, Sequence

from .combiners import (
    KeyMaterial,
    SHARE_HEADER_BYTES,
    decode_share,
    encode_share,
    key_to_symbols,
    reconstruct,
    share_secret,
    xor_combine,
)
from .fields import GF256, Field, field_by_name
from .keystream import KeyStream, as_stream
from .rate_models import RateConfig, link_rates
from .topology import Link, NetworkTopology

SERIES = "series"
PARALLEL_XOR = "parallel_xor"
PARALLEL_SECRET_SHARING = "parallel_secret_sharing"
PROTOCOL_KINDS = (SERIES, PARALLEL_XOR, PARALLEL_SECRET_SHARING)


class ProtocolAbort(RuntimeError):
    """A session could not complete; names the dead link or channel."""

    def __init__(self, reason: str, *, link_id: str | None = None, channel_id: str | None = None):
        super().__init__(reason)
        self.reason = reason
        self.link_id = link_id
        self.channel_id = channel_id


@dataclass(frozen=True)
class Channel:
    id: str
    path: tuple[str, ...]

    def interior_nodes(self, topology: NetworkTopology) -> list[str]:
        return topology.walk(self.path)[1:-1]


@dataclass(frozen=True)
class ProtocolConfig:
    kind: str
    channels: tuple[Channel, ...]
    t: int | None = None
    field: str = "gf256"

    def __post_init__(self) -> None:
        if self.kind not in PROTOCOL_KINDS:
            raise ValueError(f"unknown protocol kind {self.kind!r}")
        if not self.channels:
            raise ValueError("protocol needs at least one channel")
        if self.kind == SERIES and len(self.channels) != 1:
            raise ValueError("series protocol takes exactly one channel")
        if self.kind == PARALLEL_XOR and len(self.channels) < 2:
            raise ValueError("parallel XOR needs at least two channels")
        if self.kind == PARALLEL_SECRET_SHARING:
            if self.t is None or not 1 <= self.t <= len(self.channels):
                raise ValueError(f"threshold t must lie in 1..{len(self.channels)}")
        ids = [c.id for c in self.channels]
        if len(set(ids)) != len(ids):
            raise ValueError("channel ids must be unique")

    @classmethod
    def from_dict(cls, obj: Mapping) -> ProtocolConfig:
        unknown = set(obj) - {"kind", "channels", "t", "field"}
        if unknown:
            raise ValueError(f"protocol: unknown keys {sorted(unknown)}")
        channels = []
        for i, c in enumerate(obj.get("channels", [])):
            if set(c) - {"id", "path"}:
                raise ValueError(f"protocol.channels[{i}]: unknown keys {sorted(set(c) - {'id', 'path'})}")
            channels.append(Channel(str(c.get("id", f"ch{i}")), tuple(c["path"])))
        return cls(obj["kind"], tuple(channels), obj.get("t"), obj.get("field", "gf256"))

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind, "channels": [{"id": c.id, "path": list(c.path)} for c in self.channels]}
        if self.t is not None:
            out["t"] = self.t
        out["field"] = self.field
        return out


@dataclass(frozen=True)
class Message:
    """A public transcript entry."""

    sender: str
    kind: str
    channel: str
    payload: bytes

    def to_bytes(self) -> bytes:
        parts = [self.sender, self.kind, self.channel]
        head = b"".join(len(p.encode()).to_bytes(2, "big") + p.encode() for p in parts)
        return head + len(self.payload).to_bytes(4, "big") + self.payload


@dataclass(frozen=True)
class LinkKey:
    """One key established over a link, held identically by both endpoints."""

    link_id: str
    endpoints: tuple[str, str]
    key: KeyMaterial
    elapsed: float


@dataclass
class SessionResult:
    protocol: str
    alice_key: KeyMaterial
    bob_key: KeyMaterial
    transcript: tuple[Message, ...]
    link_keys: dict[str, tuple[KeyMaterial, ...]]
    channel_keys: dict[str, KeyMaterial]
    elapsed_model_time: float
    bits_drawn: dict[str, int]
    delivered: tuple[str, ...]
    warnings: tuple[str, ...] = ()

    @property
    def keys_match(self) -> bool:
        return (self.alice_key.bits, self.alice_key.length_bits) == (self.bob_key.bits, self.bob_key.length_bits)

    def transcript_bytes(self) -> bytes:
        return b"".join(m.to_bytes() for m in self.transcript)


def establish_link_key(link: Link, length_bits: int, seed: int | KeyStream, rate: float) -> LinkKey:
    """Draw ``length_bits`` fresh key bits shared by the link's two endpoints."""
    if length_bits <= 0:
        raise ValueError("length_bits must be positive")
    if rate <= 0:
        raise ProtocolAbort(f"link {link.id} dead at this distance (rate 0)", link_id=link.id)
    stream = as_stream(seed, f"link:{link.id}")
    key = KeyMaterial.from_int(stream.draw_bits(length_bits), length_bits, f"link:{link.id}")
    return LinkKey(link.id, link.endpoints, key, length_bits / rate)


def _resolve_rates(topology: NetworkTopology, rates) -> dict[str, float]:
    if rates is None or isinstance(rates, RateConfig):
        return link_rates(topology, rates)
    return dict(rates)


class _Session:
    def __init__(self, topology: NetworkTopology, seed: int, rates):
        self.topology = topology
        self.seed = seed
        self.rates = _resolve_rates(topology, rates)
        self.streams: dict[str, KeyStream] = {}
        self.link_keys: dict[str, list[KeyMaterial]] = defaultdict(list)
        self.transcript: list[Message] = []
        self.warnings: list[str] = []

    def stream(self, label: str) -> KeyStream:
        if label not in self.streams:
            self.streams[label] = KeyStream(self.seed, label)
        return self.streams[label]

    def dead_link(self, channel: Channel) -> str | None:
        self.topology.walk(channel.path)
        for link_id in channel.path:
            if self.rates[link_id] <= 0:
                return link_id
        return None

    def relay(self, channel: Channel, length_bits: int) -> tuple[KeyMaterial, KeyMaterial, float]:
        """Series relay along one channel; returns (alice key, bob key, elapsed)."""
        nodes = self.topology.walk(channel.path)
        segment = []
        for link_id in channel.path:
            lk = establish_link_key(
                self.topology.link(link_id), length_bits, self.stream(f"link:{link_id}"), self.rates[link_id]
            )
            self.link_keys[link_id].append(lk.key)
            segment.append(lk)
        start = len(self.transcript)
        for i in range(1, len(segment)):
            c = xor_combine([segment[i - 1].key, segment[i].key])
            self.transcript.append(Message(nodes[i], "relay-xor", channel.id, c.bits))
        # bob folds the published XORs into his own segment key
        bob_value = segment[-1].key.value
        for msg in self.transcript[start:]:
            bob_value ^= int.from_bytes(msg.payload, "big")
        alice_key = KeyMaterial(segment[0].key.bits, f"channel:{channel.id}", length_bits)
        bob_key = KeyMaterial.from_int(bob_value, length_bits, f"channel:{channel.id}")
        elapsed = length_bits / min(self.rates[l] for l in channel.path)
        return alice_key, bob_key, elapsed

    def result(self, protocol, alice_key, bob_key, channel_keys, elapsed, delivered) -> SessionResult:
        return SessionResult(
            protocol=protocol,
            alice_key=alice_key,
            bob_key=bob_key,
            transcript=tuple(self.transcript),
            link_keys={k: tuple(v) for k, v in self.link_keys.items()},
            channel_keys=channel_keys,
            elapsed_model_time=elapsed,
            bits_drawn={label: s.bits_drawn for label, s in sorted(self.streams.items())},
            delivered=tuple(delivered),
            warnings=tuple(self.warnings),
        )


def _overlap_warnings(topology: NetworkTopology, channels: Sequence[Channel]) -> list[str]:
    warnings = []
    for i, a in enumerate(channels):
        elems_a = set(a.path) | set(a.interior_nodes(topology))
        for b in channels[i + 1 :]:
            shared = elems_a & (set(b.path) | set(b.interior_nodes(topology)))
            if shared:
                warnings.append(f"channels {a.id} and {b.id} share elements {sorted(shared)}")
    return warnings


def run_series_relay(
    topology: NetworkTopology, channel: Channel, length_bits: int, seed: int, *, rates=None
) -> SessionResult:
    """Relay a key through data centers; the final key is the first segment key."""
    session = _Session(topology, seed, rates)
    dead = session.dead_link(channel)
    if dead is not None:
        raise ProtocolAbort(f"link {dead} dead at this distance (rate 0)", link_id=dead, channel_id=channel.id)
    alice_key, bob_key, elapsed = session.relay(channel, length_bits)
    return session.result(SERIES, alice_key, bob_key, {channel.id: alice_key}, elapsed, [channel.id])


def run_parallel_xor(
    topology: NetworkTopology, channels: Sequence[Channel], length_bits: int, seed: int, *, rates=None
) -> SessionResult:
    """XOR the end-to-end keys of every channel; all channels must succeed."""
    if len(channels) < 2:
        raise ValueError("parallel XOR needs at least two channels")
    session = _Session(topology, seed, rates)
    for ch in channels:
        dead = session.dead_link(ch)
        if dead is not None:
            raise ProtocolAbort(f"channel {ch.id} failed: link {dead} dead", link_id=dead, channel_id=ch.id)
    session.warnings.extend(_overlap_warnings(topology, channels))
    alice_parts, bob_parts, channel_keys, elapsed = [], [], {}, 0.0
    for ch in channels:
        a, b, dt = session.relay(ch, length_bits)
        alice_parts.append(a)
        bob_parts.append(b)
        channel_keys[ch.id] = a
        elapsed = max(elapsed, dt)
    alice_key = xor_combine(alice_parts)
    bob_key = xor_combine(bob_parts)
    return session.result(PARALLEL_XOR, alice_key, bob_key, channel_keys, elapsed, [c.id for c in channels])


def _pad_symbols(pad: KeyMaterial, count: int, bits: int) -> list[int]:
    mask = (1 << bits) - 1
    v = pad.value
    return [(v >> (bits * (count - 1 - i))) & mask for i in range(count)]


def run_parallel_secret_sharing(
    topology: NetworkTopology,
    channels: Sequence[Channel],
    t: int,
    length_bits: int,
    seed: int,
    *,
    rates=None,
    field: Field | str = GF256,
) -> SessionResult:
    """Send one Shamir share per channel under a one-time pad; any ``t`` suffice.

    The share header (version, t, n, index, field tag) is public metadata and
    travels in clear; only the payload symbols are padded.
    """
    if isinstance(field, str):
        field = field_by_name(field)
    n = len(channels)
    if not 1 <= t <= n:
        raise ValueError(f"need 1 <= t <= n = {n}, got t={t}")
    session = _Session(topology, seed, rates)
    dead = {ch.id: session.dead_link(ch) for ch in channels}
    live = [ch for ch in channels if dead[ch.id] is None]
    if len(live) < t:
        raise ProtocolAbort(
            f"fewer than t live channels: {len(live)} live, t={t}",
            channel_id=next(ch.id for ch in channels if dead[ch.id] is not None),
        )
    session.warnings.extend(_overlap_warnings(topology, channels))

    alice_stream = session.stream("alice")
    final = KeyMaterial.from_int(alice_stream.draw_bits(length_bits), length_bits, "alice")
    shares = share_secret(final, t, n, alice_stream, field)
    symbols = len(key_to_symbols(final, field))

    bob_shares, channel_keys, elapsed, delivered = [], {}, [], []
    for ch, share in zip(channels, shares):
        if dead[ch.id] is not None:
            session.warnings.append(f"channel {ch.id} dead (link {dead[ch.id]}); share {share.index} not sent")
            continue
        a, b, dt = session.relay(ch, symbols * field.symbol_bits)
        channel_keys[ch.id] = a
        pad = _pad_symbols(a, symbols, field.symbol_bits)
        header = encode_share(share)[:SHARE_HEADER_BYTES]
        cipher = bytes(s ^ p for s, p in zip(share.payload, pad))
        msg = Message(topology.alice, "share", ch.id, header + cipher)
        session.transcript.append(msg)
        # bob's side: strip his pad from what arrived
        bob_pad = _pad_symbols(b, symbols, field.symbol_bits)
        plain = bytes(c ^ p for c, p in zip(msg.payload[SHARE_HEADER_BYTES:], bob_pad))
        bob_shares.append(decode_share(msg.payload[:SHARE_HEADER_BYTES] + plain))
        elapsed.append(dt)
        delivered.append(ch.id)

    bob_key = reconstruct(bob_shares)
    alice_key = KeyMaterial(final.bits, bob_key.origin, length_bits)
    session_time = sorted(elapsed)[t - 1]
    return session.result(PARALLEL_SECRET_SHARING, alice_key, bob_key, channel_keys, session_time, delivered)


def run_protocol(
    topology: NetworkTopology, config: ProtocolConfig, length_bits: int, seed: int, *, rates=None
) -> SessionResult:
    if config.kind == SERIES:
        return run_series_relay(topology, config.channels[0], length_bits, seed, rates=rates)
    if config.kind == PARALLEL_XOR:
        return run_parallel_xor(topology, config.channels, length_bits, seed, rates=rates)
    return run_parallel_secret_sharing(
        topology, config.channels, config.t, length_bits, seed, rates=rates, field=config.field
    )


def channel_rate(channel: Channel, rates: Mapping[str, float]) -> float:
    return min(rates[l] for l in channel.path)


def protocol_rate(topology: NetworkTopology, config: ProtocolConfig, rates: Mapping[str, float]) -> float:
    """End-to-end key rate of a protocol deployment.

    Series and XOR need every channel, so the slowest one bounds the rate;
    secret sharing completes once the ``t``-th fastest channel delivers.
    """
    for ch in config.channels:
        topology.walk(ch.path)
    per_channel = sorted((channel_rate(ch, rates) for ch in config.channels), reverse=True)
    if config.kind == PARALLEL_SECRET_SHARING:
        return per_channel[config.t - 1]
    return per_channel[-1]

