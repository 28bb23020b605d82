"""Rank network elements by how many minimal access structures they appear in."""

import argparse
from pathlib import Path

from hybrid_keynet.access_analysis import break_probability, derive_access_formula, minimal_access_structures
from hybrid_keynet.scenario import parse_scenario
from hybrid_keynet.topology import parse_topology


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("topology", type=Path)
    ap.add_argument("scenario", type=Path)
    args = ap.parse_args()
    topo = parse_topology(args.topology.read_text())
    scenario = parse_scenario(args.scenario.read_text())
    formula = derive_access_formula(topo, scenario.protocol)
    structures = minimal_access_structures(formula)
    analysis = break_probability(structures, topo)
    print(f"formula: {formula}")
    print(f"minimal sets: {len(structures.minimal_sets)}, break probability {analysis.probability:.6g}")
    for element, count in structures.ranking():
        print(f"  {element:<10} {count:>4}  p={topo.compromise_prob(element):.3f}")


if __name__ == "__main__":
    main()
