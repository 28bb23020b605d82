"""Write a rate-vs-distance CSV for the QKD modes and a fixed KEM template."""

import argparse
import sys

from hybrid_keynet.report import sweep_csv, sweep_rows
from hybrid_keynet.scenario import Scenario, parse_scenario


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--scenario", help="scenario JSON; its first crossover pair sets the templates")
    ap.add_argument("--start", type=float, default=0.0)
    ap.add_argument("--stop", type=float, default=500.0)
    ap.add_argument("--step", type=float, default=10.0)
    args = ap.parse_args()
    scenario = parse_scenario(open(args.scenario).read()) if args.scenario else Scenario()
    sys.stdout.write(sweep_csv(sweep_rows(scenario, args.start, args.stop, args.step)))


if __name__ == "__main__":
    main()
