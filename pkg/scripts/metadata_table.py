#!/usr/bin/env python3
"""Print counted per-node synchronization metadata next to the closed forms.

Drives a degree-4 mesh to a steady state (every summary vector full, one
fresh pending update per node) and reads each replica's stored link
metadata, which should equal the predictor exactly.
"""

import argparse
import sys
from collections import deque
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from crdtlab.crdts import GSet, add
from crdtlab.protocols import LocalUpdate, make_replica, metadata_cost
from crdtlab.simnet import build_mesh
from crdtlab.workloads import apply_op

PROTOCOLS = (
    "state-based",
    "delta-classic",
    "delta-bp-rr",
    "scuttlebutt",
    "scuttlebutt-gc",
    "op-based",
)


def steady_link_metadata(protocol: str, n: int, warm: int = 12) -> set:
    topo = build_mesh(n, 4)
    reps = {
        node: make_replica(protocol, node, topo.neighbors(node), GSet(),
                           op_apply=apply_op, all_nodes=topo.node_ids)
        for node in topo.node_ids
    }
    stamp = 0

    def do_ops():
        nonlocal stamp
        stamp += 1
        for node, r in reps.items():
            token = f"{node}-{stamp}"
            r.on_operation(LocalUpdate(add(token), ("set-add", token)))

    def sync_round():
        queue = deque()
        for node in topo.node_ids:
            queue.extend(reps[node].sync_tick())
        while queue:
            env = queue.popleft()
            queue.extend(reps[env.dst].on_receive(env))

    for _ in range(warm):
        do_ops()
        sync_round()
    for _ in range(warm):
        sync_round()
    do_ops()
    return {r.link_metadata_units() for r in reps.values()}


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--nodes", type=int, nargs="+", default=[8, 16])
    args = parser.parse_args()

    print(f"{'protocol':15s} {'n':>3s} {'counted':>8s} {'formula':>8s}")
    mismatches = 0
    for protocol in PROTOCOLS:
        for n in args.nodes:
            counted = steady_link_metadata(protocol, n)
            expected = metadata_cost(protocol, n, 4, u=1)
            shown = counted.pop() if len(counted) == 1 else counted
            flag = "" if shown == expected else "  MISMATCH"
            mismatches += bool(flag)
            print(f"{protocol:15s} {n:3d} {shown!s:>8s} {expected:8d}{flag}")
    return 1 if mismatches else 0


if __name__ == "__main__":
    sys.exit(main())
