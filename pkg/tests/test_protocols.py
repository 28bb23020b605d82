from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hybrid_keynet.combiners import xor_combine
from hybrid_keynet.protocols import (
    PARALLEL_SECRET_SHARING,
    Channel,
    ProtocolAbort,
    ProtocolConfig,
    establish_link_key,
    protocol_rate,
    run_parallel_secret_sharing,
    run_parallel_xor,
    run_protocol,
    run_series_relay,
)
from hybrid_keynet.rate_models import link_rates
from hybrid_keynet.topology import PathError

from conftest import load_topology

SERIES = Channel("via-dc", ("q1", "k1", "q2"))
SHARING = (Channel("c1", ("a1", "b1")), Channel("c2", ("a2", "b2")), Channel("c3", ("k3",)))
seeds = st.integers(0, 2**31)


def test_series_final_key_is_first_segment_key():
    topo = load_topology("series_1000km.json")
    res = run_series_relay(topo, SERIES, 128, 42)
    assert res.keys_match
    assert res.alice_key.bits == res.link_keys["q1"][0].bits
    assert [m.sender for m in res.transcript] == ["D1", "D2"]
    # each relay publishes the XOR of its two segment keys
    k = {l: res.link_keys[l][0] for l in ("q1", "k1", "q2")}
    assert res.transcript[0].payload == xor_combine([k["q1"], k["k1"]]).bits
    assert res.transcript[1].payload == xor_combine([k["k1"], k["q2"]]).bits


def test_series_elapsed_time_uses_slowest_link():
    topo = load_topology("series_1000km.json")
    res = run_series_relay(topo, SERIES, 256, 1)
    assert res.elapsed_model_time == pytest.approx(256 / link_rates(topo)["k1"])


@settings(max_examples=40, deadline=None)
@given(seeds, st.sampled_from([4, 8, 128, 256]))
def test_key_consumption_accounting(seed, length):
    topo = load_topology("sharing.json")
    res = run_parallel_xor(topo, SHARING, length, seed)
    assert res.keys_match
    # every link use draws exactly one key of the requested length
    assert res.bits_drawn == {f"link:{l}": length for l in ("a1", "b1", "a2", "b2", "k3")}
    assert all(len(v) == 1 for v in res.link_keys.values())


@settings(max_examples=40, deadline=None)
@given(seeds, st.sampled_from([8, 64, 256]))
def test_sharing_consumes_one_pad_per_share(seed, length):
    topo = load_topology("sharing.json")
    res = run_parallel_secret_sharing(topo, SHARING, 2, length, seed)
    assert res.keys_match
    counts = Counter(res.bits_drawn)
    for link in ("a1", "b1", "a2", "b2", "k3"):
        assert counts[f"link:{link}"] == length
    shares = [m for m in res.transcript if m.kind == "share"]
    assert len(shares) == 3
    assert all(len(m.payload) == 5 + length // 8 for m in shares)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_same_seed_same_session(seed):
    topo = load_topology("sharing.json")
    cfg = ProtocolConfig(PARALLEL_SECRET_SHARING, SHARING, 2)
    a = run_protocol(topo, cfg, 64, seed)
    b = run_protocol(topo, cfg, 64, seed)
    assert a.transcript_bytes() == b.transcript_bytes()
    assert a.alice_key == b.alice_key


def test_different_seeds_differ():
    topo = load_topology("series_1000km.json")
    assert run_series_relay(topo, SERIES, 128, 1).alice_key != run_series_relay(topo, SERIES, 128, 2).alice_key


def test_dead_link_aborts_with_link_name():
    topo = load_topology("sharing.json")
    with pytest.raises(ProtocolAbort) as info:
        run_series_relay(topo, Channel("long", ("qlong",)), 128, 0)
    assert info.value.link_id == "qlong"
    assert "qlong" in info.value.reason


def test_establish_link_key_refuses_zero_rate():
    topo = load_topology("sharing.json")
    with pytest.raises(ProtocolAbort):
        establish_link_key(topo.link("qlong"), 8, 0, 0.0)
    lk = establish_link_key(topo.link("a1"), 8, 0, 800.0)
    assert lk.elapsed == pytest.approx(0.01)


def test_sharing_survives_one_dead_channel():
    topo = load_topology("sharing.json")
    channels = SHARING[:2] + (Channel("c3", ("qlong",)),)
    res = run_parallel_secret_sharing(topo, channels, 2, 64, 3)
    assert res.keys_match
    assert res.delivered == ("c1", "c2")
    assert any("qlong" in w for w in res.warnings)
    with pytest.raises(ProtocolAbort, match="fewer than t"):
        run_parallel_secret_sharing(topo, channels, 3, 64, 3)


def test_xor_warns_about_shared_relay():
    topo = load_topology("mixed.json")
    res = run_parallel_xor(topo, (Channel("c1", ("a1", "b1")), Channel("c2", ("a2", "b2"))), 32, 0)
    assert res.keys_match
    assert any("D1" in w for w in res.warnings)


def test_invalid_path_is_rejected():
    topo = load_topology("series_1000km.json")
    with pytest.raises(PathError):
        run_series_relay(topo, Channel("bad", ("q1", "q2")), 8, 0)


def test_config_validation():
    with pytest.raises(ValueError, match="threshold"):
        ProtocolConfig(PARALLEL_SECRET_SHARING, SHARING, 4)
    with pytest.raises(ValueError, match="exactly one"):
        ProtocolConfig("series", SHARING)
    cfg = ProtocolConfig(PARALLEL_SECRET_SHARING, SHARING, 2, "gf16")
    assert ProtocolConfig.from_dict(cfg.to_dict()) == cfg


def test_protocol_rate_threshold_picks_tth_fastest():
    topo = load_topology("sharing.json")
    rates = link_rates(topo)
    per_channel = sorted([min(rates["a1"], rates["b1"]), min(rates["a2"], rates["b2"]), rates["k3"]], reverse=True)
    for t in (1, 2, 3):
        cfg = ProtocolConfig(PARALLEL_SECRET_SHARING, SHARING, t)
        assert protocol_rate(topo, cfg, rates) == per_channel[t - 1]
    assert protocol_rate(topo, ProtocolConfig("parallel_xor", SHARING), rates) == per_channel[-1]
