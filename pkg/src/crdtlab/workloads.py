"""Workload generators: three micro-benchmarks and a scaled Twitter clone.

Micro-benchmarks drive a single replicated object, one update per node per
interval: a unique-element set addition, a counter increment, or a batch of
grow-only-map writes touching a per-node slice of the keyspace sized so the
whole network updates roughly a target percentage of keys each interval.

The Twitter-clone workload replicates per-user objects (a follower set, a
wall map and a timeline map) across all nodes and mixes three application
actions: follow (one CRDT update to the followee's follower set), post (a
wall write plus one timeline write per follower) and a read-only timeline
fetch.  Which user an action targets is sampled from a Zipf distribution,
so the coefficient dials contention on the hottest objects.

Generators are pure functions of per-node seeded RNG streams.  The follower
fan-out for posts is resolved against a registry maintained inside the
generator (updated the moment a follow is generated), not against replica
state, so the sequence of CRDT updates is identical whatever protocol is
under test and converged states can be compared across protocols.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass
from typing import Callable

from .crdts import GMap, GSet, add, inc, map_update
from .lattice import LatticeElement
from .protocols import LocalUpdate


@dataclass(frozen=True)
class Op:
    """One CRDT update against one replicated object."""

    channel: str
    update: LocalUpdate


@dataclass(frozen=True)
class Read:
    """A read-only query against one object; costs no transmission."""

    channel: str
    query: Callable


@dataclass(frozen=True)
class MicroSpec:
    kind: str  # "gset" | "gcounter" | "gmap"
    percent: float = 10.0
    keys: int = 1000

    def __post_init__(self):
        if self.kind not in ("gset", "gcounter", "gmap"):
            raise ValueError(f"unknown micro workload {self.kind!r}")
        if not 0 < self.percent <= 100:
            raise ValueError("percent must be in (0, 100]")
        if self.keys < 1:
            raise ValueError("need at least one key")


@dataclass(frozen=True)
class RetwisSpec:
    kind: str = "retwis"
    users: int = 100
    zipf: float = 1.0
    follow_pct: int = 15
    post_pct: int = 35
    timeline_pct: int = 50

    def __post_init__(self):
        if self.kind != "retwis":
            raise ValueError("retwis spec must have kind 'retwis'")
        if self.users < 2:
            raise ValueError("need at least two users")
        if not 0.0 <= self.zipf <= 2.0:
            raise ValueError("zipf coefficient out of range")
        if self.follow_pct + self.post_pct + self.timeline_pct != 100:
            raise ValueError("operation mix must sum to 100%")


def spec_from_dict(d: dict):
    kind = d.get("kind")
    if kind == "retwis":
        return RetwisSpec(**d)
    return MicroSpec(**d)


# ---------------------------------------------------------------------------
# Zipf sampling


class ZipfSampler:
    """Ranks 1..n with probability proportional to rank^-s, via a cumulative table."""

    def __init__(self, n: int, s: float):
        if n < 1 or s < 0:
            raise ValueError("need n >= 1 and s >= 0")
        self.n = n
        self.s = s
        acc, cum = 0.0, []
        for k in range(1, n + 1):
            acc += k ** -s
            cum.append(acc)
        self._cum = cum
        self.total = acc

    def probability(self, rank: int) -> float:
        return (rank ** -self.s) / self.total

    def sample(self, rng) -> int:
        """A rank in 1..n."""
        return bisect_left(self._cum, rng.random() * self.total) + 1


_samplers: dict[tuple[int, float], ZipfSampler] = {}


def zipf_sample(n: int, s: float, rng) -> int:
    sampler = _samplers.get((n, s))
    if sampler is None:
        sampler = _samplers[(n, s)] = ZipfSampler(n, s)
    return sampler.sample(rng)


# ---------------------------------------------------------------------------
# operation interpreter for the op-based protocol


def apply_op(state: LatticeElement, op: tuple) -> LatticeElement:
    """Turn a portable operation descriptor into a delta at the local state."""
    kind = op[0]
    if kind == "set-add":
        return add(op[1])(state)
    if kind == "counter-inc":
        return inc(op[1])(state)
    if kind == "map-add":
        return map_update(op[1], add(op[2]))(state)
    raise ValueError(f"unknown operation {op!r}")


# ---------------------------------------------------------------------------
# micro-benchmarks


def gmap_keys_per_node(percent: float, keys: int, nodes: int) -> int:
    """Per-node slice size: each node's share of the global target, rounded up."""
    return math.ceil(percent / 100.0 * keys / nodes)


class MicroWorkload:
    CHANNEL = "obj"

    def __init__(self, spec: MicroSpec, node_ids):
        self.spec = spec
        self.node_ids = list(node_ids)
        self._index = {node: i for i, node in enumerate(self.node_ids)}
        self._ops_done = {node: 0 for node in self.node_ids}
        if spec.kind == "gmap":
            self._slice = gmap_keys_per_node(spec.percent, spec.keys, len(self.node_ids))

    def bottom_for(self, channel: str) -> LatticeElement:
        if self.spec.kind == "gset":
            return GSet()
        if self.spec.kind == "gcounter":
            from .crdts import GCounter

            return GCounter()
        return GMap(GSet())

    def node_keys(self, node: str) -> list[str]:
        """The key slice one node rewrites each interval; slices are disjoint
        whenever the keyspace is large enough to go around."""
        c = self._slice
        start = self._index[node] * c
        return [f"k{(start + i) % self.spec.keys:04d}" for i in range(c)]

    def ops_for(self, node: str, tick: int, rng) -> list:
        kind = self.spec.kind
        if kind == "gset":
            self._ops_done[node] += 1
            token = f"{node}-{self._ops_done[node]}"
            return [Op(self.CHANNEL, LocalUpdate(add(token), ("set-add", token)))]
        if kind == "gcounter":
            return [Op(self.CHANNEL, LocalUpdate(inc(node), ("counter-inc", node)))]
        ops = []
        for key in self.node_keys(node):
            token = f"{node}-{tick}-{key}"
            ops.append(
                Op(self.CHANNEL, LocalUpdate(map_update(key, add(token)), ("map-add", key, token)))
            )
        return ops


# ---------------------------------------------------------------------------
# Twitter clone


def timeline_recent(timeline: GMap, count: int = 10) -> list:
    """Most recent timeline entries, newest first (keys embed the tick)."""
    recent = sorted(timeline.keys(), reverse=True)[:count]
    return [(ts, sorted(map(str, timeline.get(ts).elements))) for ts in recent]


class RetwisWorkload:
    def __init__(self, spec: RetwisSpec, node_ids):
        self.spec = spec
        self.node_ids = list(node_ids)
        self.users = [f"u{i:03d}" for i in range(spec.users)]
        self.followers = {u: set() for u in self.users}
        self._sampler = ZipfSampler(spec.users, spec.zipf)

    def bottom_for(self, channel: str) -> LatticeElement:
        family = channel.split(":", 1)[0]
        if family == "followers":
            return GSet()
        if family in ("wall", "timeline"):
            return GMap(GSet())
        raise ValueError(f"unknown object {channel!r}")

    def _zipf_user(self, rng) -> str:
        return self.users[self._sampler.sample(rng) - 1]

    def _uniform_user(self, rng) -> str:
        return self.users[rng.randrange(len(self.users))]

    def ops_for(self, node: str, tick: int, rng) -> list:
        roll = rng.random() * 100
        if roll < self.spec.follow_pct:
            return self._follow(rng)
        if roll < self.spec.follow_pct + self.spec.post_pct:
            return self._post(node, tick, rng)
        return self._timeline(rng)

    def _follow(self, rng) -> list:
        follower = self._uniform_user(rng)
        followee = self._zipf_user(rng)
        while followee == follower:
            followee = self._zipf_user(rng)
        self.followers[followee].add(follower)
        up = LocalUpdate(add(follower), ("set-add", follower))
        return [Op(f"followers:{followee}", up)]

    def _post(self, node: str, tick: int, rng) -> list:
        poster = self._zipf_user(rng)
        tweet = f"tw-{node}-{tick}"
        content = f"c-{tweet}"
        ops = [
            Op(
                f"wall:{poster}",
                LocalUpdate(map_update(tweet, add(content)), ("map-add", tweet, content)),
            )
        ]
        stamp = f"{tick:06d}:{tweet}"
        for follower in sorted(self.followers[poster]):
            ops.append(
                Op(
                    f"timeline:{follower}",
                    LocalUpdate(map_update(stamp, add(tweet)), ("map-add", stamp, tweet)),
                )
            )
        return ops

    def _timeline(self, rng) -> list:
        reader = self._uniform_user(rng)
        return [Read(f"timeline:{reader}", lambda state: timeline_recent(state, 10))]


def make_workload(spec, node_ids):
    if isinstance(spec, RetwisSpec):
        return RetwisWorkload(spec, node_ids)
    if isinstance(spec, MicroSpec):
        return MicroWorkload(spec, node_ids)
    raise TypeError(f"not a workload spec: {spec!r}")
