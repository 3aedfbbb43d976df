#!/usr/bin/env python3
"""Run the bundled micro-benchmark experiments and print headline ratios.

Executes the set/counter/map specs over both topologies and reports each
protocol's total transmission relative to the fully optimized delta variant.
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from crdtlab.cli import config_from_spec, load_spec
from crdtlab.simnet import run

SPECS = [
    "micro-gset-mesh.json",
    "micro-gset-tree.json",
    "micro-gcounter-mesh.json",
    "micro-gmap10-mesh.json",
]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seeds", type=int, default=3, help="seeds per cell")
    parser.add_argument("--ops", type=int, default=100, help="updates per replica")
    args = parser.parse_args()

    spec_dir = Path(__file__).resolve().parent.parent / "specs"
    for spec_name in SPECS:
        spec = load_spec(str(spec_dir / spec_name))
        print(f"== {spec['name']} ({args.seeds} seeds, {args.ops} updates/replica)")
        spec = dict(spec, ops_per_replica=args.ops)
        totals = {}
        for protocol in spec["protocols"]:
            transmission = 0
            for k in range(args.seeds):
                metrics = run(config_from_spec(spec, protocol, spec.get("seed", 1) + k))
                if not metrics.converged:
                    print(f"  {protocol}: NO CONVERGENCE")
                    return 3
                transmission += metrics.total_transmission
            totals[protocol] = transmission
        baseline = totals.get("delta-bp-rr") or min(v for v in totals.values() if v)
        for protocol, transmission in totals.items():
            print(f"  {protocol:15s} {transmission:10d} entries+metadata "
                  f"({transmission / baseline:6.2f}x optimized delta)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
