"""Compare relaying through data centers against direct QKD and direct user-to-user KEM.

Sweeps total distance with fixed 10 km access segments and prints the three
end-to-end rates per distance.
"""

import argparse

from hybrid_keynet.rate_models import FIBER_RTT_MS_PER_KM, KemRateParams, QkdRateParams, RateConfig, kem_rate, qkd_rate
from hybrid_keynet.topology import ComputeTier


def rates_at(total_km: float, access_km: float, cfg: RateConfig) -> dict[str, float]:
    qkd = lambda km: qkd_rate(QkdRateParams(cfg.qkd_source_rate_hz, cfg.qkd_protocol_efficiency, 0.2, km,
                                            cutoff_rate_hz=cfg.qkd_cutoff_rate_hz))
    kem = lambda tier, km: kem_rate(KemRateParams(cfg.handshakes_per_sec[tier], cfg.kem_bits_per_handshake,
                                                  km * FIBER_RTT_MS_PER_KM, cfg.kem_bandwidth_bits_per_sec))
    backbone = total_km - 2 * access_km
    return {
        "series": min(qkd(access_km), kem(ComputeTier.HIGH_PERFORMANCE, backbone)),
        "direct_qkd": qkd(total_km),
        "direct_kem": kem(ComputeTier.LIMITED, total_km),
    }


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--access-km", type=float, default=10.0)
    ap.add_argument("--distances", type=float, nargs="+", default=[50, 100, 200, 500, 1000, 2000])
    args = ap.parse_args()
    cfg = RateConfig()
    print(f"{'km':>8} {'series':>14} {'direct_qkd':>14} {'direct_kem':>14}")
    for d in args.distances:
        r = rates_at(d, args.access_km, cfg)
        print(f"{d:8.0f} {r['series']:14.1f} {r['direct_qkd']:14.1f} {r['direct_kem']:14.1f}")


if __name__ == "__main__":
    main()
