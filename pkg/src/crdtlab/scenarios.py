"""Scripted synchronization traces with golden expected payloads.

Two hand-driven replays over a grow-only set show exactly where the delta
variants shed redundant transmission; each is runnable under all four delta
protocols and compared against a frozen expected trace.

``fig4`` — two replicas ping-pong while both keep updating.  The classic
algorithm re-ships whatever it just received, so groups grow like full
states; tagging buffer entries with their origin (the ``bp`` variants) stops
groups from being echoed back to the neighbor that sent them.

``fig5`` — four replicas on a diamond (A-B, B-C, C-D, A-C).  The cycle
delivers overlapping groups to C through two paths; only the ``rr`` variants
reduce the received group to its novel part before forwarding it on to D.

Each scripted step is one replica synchronizing toward chosen targets;
deliveries are immediate unless a step holds them to interleave an update,
mirroring the race the traces are about.
"""

from __future__ import annotations

from dataclasses import dataclass

from .crdts import GSet, add
from .protocols import DeltaReplica, LocalUpdate, make_replica

SCENARIOS = ("fig4", "fig5")

DELTA_VARIANTS = ("delta-classic", "delta-bp", "delta-rr", "delta-bp-rr")


@dataclass(frozen=True)
class SyncRecord:
    """One scripted synchronization message: step label, edge and payload."""

    step: str
    src: str
    dst: str
    payload: tuple
    entries: int

    def render(self) -> str:
        body = "{" + ",".join(self.payload) + "}" if self.payload else "{}"
        return f"{self.step} {self.src}->{self.dst} {body}"


class _Script:
    def __init__(self, protocol: str, neighbors: dict[str, tuple]):
        self.replicas: dict[str, DeltaReplica] = {
            node: make_replica(protocol, node, peers, GSet())
            for node, peers in neighbors.items()
        }
        self.records: list[SyncRecord] = []
        self.held = []

    def op(self, node: str, element: str) -> None:
        self.replicas[node].on_operation(LocalUpdate(add(element), ("set-add", element)))

    def sync(self, step: str, node: str, targets, hold: bool = False) -> None:
        for env in self.replicas[node].sync_to(targets):
            self.records.append(
                SyncRecord(step, env.src, env.dst,
                           tuple(sorted(map(str, env.payload.elements))), env.entries)
            )
            if hold:
                self.held.append(env)
            else:
                self.replicas[env.dst].on_receive(env)

    def release(self) -> None:
        for env in self.held:
            self.replicas[env.dst].on_receive(env)
        self.held.clear()


def run_fig4(protocol: str) -> list[SyncRecord]:
    """Two replicas, both updating between every round."""
    s = _Script(protocol, {"A": ("B",), "B": ("A",)})
    s.op("A", "a")
    s.op("B", "b")
    s.sync("s1", "B", ["A"])
    # A answers, but B squeezes in another update before the group lands.
    s.sync("s2", "A", ["B"], hold=True)
    s.op("B", "c")
    s.release()
    s.sync("s3", "B", ["A"])
    return s.records


def run_fig5(protocol: str) -> list[SyncRecord]:
    """Four replicas on a diamond; C hears the same update twice."""
    s = _Script(
        protocol,
        {
            "A": ("B", "C"),
            "B": ("A", "C"),
            "C": ("A", "B", "D"),
            "D": ("C",),
        },
    )
    s.op("A", "a")
    s.op("B", "b")
    s.sync("s4", "B", ["A", "C"])
    s.sync("s5", "C", ["D"])
    s.sync("s6", "A", ["B", "C"])
    s.sync("s7", "C", ["D"])
    return s.records


GOLDEN = {
    "fig4": {
        "delta-classic": (
            ("s1", "B", "A", ("b",)),
            ("s2", "A", "B", ("a", "b")),
            ("s3", "B", "A", ("a", "b", "c")),
        ),
        "delta-bp": (
            ("s1", "B", "A", ("b",)),
            ("s2", "A", "B", ("a",)),
            ("s3", "B", "A", ("c",)),
        ),
        "delta-rr": (
            ("s1", "B", "A", ("b",)),
            ("s2", "A", "B", ("a", "b")),
            ("s3", "B", "A", ("a", "c")),
        ),
        "delta-bp-rr": (
            ("s1", "B", "A", ("b",)),
            ("s2", "A", "B", ("a",)),
            ("s3", "B", "A", ("c",)),
        ),
    },
    "fig5": {
        "delta-classic": (
            ("s4", "B", "A", ("b",)),
            ("s4", "B", "C", ("b",)),
            ("s5", "C", "D", ("b",)),
            ("s6", "A", "B", ("a", "b")),
            ("s6", "A", "C", ("a", "b")),
            ("s7", "C", "D", ("a", "b")),
        ),
        "delta-bp": (
            ("s4", "B", "A", ("b",)),
            ("s4", "B", "C", ("b",)),
            ("s5", "C", "D", ("b",)),
            ("s6", "A", "B", ("a",)),
            ("s6", "A", "C", ("a", "b")),
            ("s7", "C", "D", ("a", "b")),
        ),
        "delta-rr": (
            ("s4", "B", "A", ("b",)),
            ("s4", "B", "C", ("b",)),
            ("s5", "C", "D", ("b",)),
            ("s6", "A", "B", ("a", "b")),
            ("s6", "A", "C", ("a", "b")),
            ("s7", "C", "D", ("a",)),
        ),
        "delta-bp-rr": (
            ("s4", "B", "A", ("b",)),
            ("s4", "B", "C", ("b",)),
            ("s5", "C", "D", ("b",)),
            ("s6", "A", "B", ("a",)),
            ("s6", "A", "C", ("a", "b")),
            ("s7", "C", "D", ("a",)),
        ),
    },
}

_RUNNERS = {"fig4": run_fig4, "fig5": run_fig5}


def run_scenario(name: str, protocol: str) -> list[SyncRecord]:
    if name not in _RUNNERS:
        raise ValueError(f"unknown scenario {name!r}")
    return _RUNNERS[name](protocol)


def check_scenario(name: str, protocol: str) -> tuple[list[SyncRecord], list[str]]:
    """Run one variant and diff it against the golden trace."""
    records = run_scenario(name, protocol)
    got = tuple((r.step, r.src, r.dst, r.payload) for r in records)
    want = GOLDEN[name][protocol]
    diffs = []
    for i in range(max(len(got), len(want))):
        g = got[i] if i < len(got) else None
        w = want[i] if i < len(want) else None
        if g != w:
            diffs.append(f"message {i}: expected {w}, got {g}")
    return records, diffs
