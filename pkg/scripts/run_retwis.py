#!/usr/bin/env python3
"""Sweep the Twitter-clone workload over Zipf coefficients.

For each contention level, runs classic and optimized delta synchronization
and prints transmission, memory peak, processing proxy and their ratios.
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from crdtlab.simnet import SimConfig, run
from crdtlab.workloads import RetwisSpec


def peak_memory(metrics) -> int:
    by_tick = {}
    for tick, _node, state, buffered, meta in metrics.memory_samples:
        by_tick[tick] = by_tick.get(tick, 0) + state + buffered + meta
    return max(by_tick.values()) if by_tick else 0


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--zipf", type=float, nargs="+", default=[0.5, 1.0, 1.25])
    parser.add_argument("--seeds", type=int, default=2)
    parser.add_argument("--nodes", type=int, default=16)
    parser.add_argument("--users", type=int, default=100)
    parser.add_argument("--ops", type=int, default=63)
    args = parser.parse_args()

    print("zipf  protocol        entries    bytes(est)  peak-mem  visits")
    for z in args.zipf:
        cells = {}
        for protocol in ("delta-classic", "delta-bp-rr"):
            entries = visits = mem = byte_est = 0
            for k in range(args.seeds):
                m = run(
                    SimConfig(
                        seed=1 + k,
                        nodes=args.nodes,
                        topology="mesh",
                        protocol=protocol,
                        workload=RetwisSpec(users=args.users, zipf=z),
                        ops_per_replica=args.ops,
                    )
                )
                if not m.converged:
                    print(f"{z:4.2f}  {protocol}: NO CONVERGENCE")
                    return 3
                entries += m.total_entries
                visits += m.total_visits
                byte_est += m.byte_weighted_transmission()
                mem = max(mem, peak_memory(m))
            cells[protocol] = (entries, visits)
            print(f"{z:4.2f}  {protocol:15s} {entries:9d}  {byte_est:10d}  {mem:8d}  {visits:9d}")
        ratio_e = cells["delta-classic"][0] / cells["delta-bp-rr"][0]
        ratio_v = cells["delta-classic"][1] / cells["delta-bp-rr"][1]
        print(f"      -> classic/optimized: {ratio_e:.2f}x transmission, {ratio_v:.2f}x processing")
    return 0


if __name__ == "__main__":
    sys.exit(main())
