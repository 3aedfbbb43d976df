"""Deterministic discrete-event network simulator.

Replicas live on the nodes of a fixed topology and exchange envelopes
through reliable channels that may delay, reorder (via unequal delays) and
duplicate.  Each simulated tick runs in three phases: local updates first,
then message deliveries, then synchronization rounds, so a message sent with
delay one is available to its receiver's next synchronization, the regime
where concurrent updates always land between rounds.

Time, randomness and event order are fully determined by the configuration:
per-node workload streams and the network stream are split off the run seed
by hashing, and every event is processed in (tick, phase, insertion) order.
Two runs with equal configs produce identical metrics and an identical
event-trace hash.

After the scheduled updates are exhausted the simulator runs quiescence
rounds (everyone synchronizes, the queue drains) until all replicas hold
equal states or a bound of four times the topology diameter is hit, which
reports as an explicit non-convergence.
"""

from __future__ import annotations

import hashlib
import heapq
import random
from collections import deque
from dataclasses import asdict, dataclass

from .lattice import VISITS
from .metrics import NodeCounters, RunMetrics
from .protocols import make_replica
from .workloads import MicroSpec, Op, Read, RetwisSpec, apply_op, make_workload

RNG_NAME = "mt19937(sha256-split)"


def split_rng(seed: int, label: str) -> random.Random:
    """Independent, portable stream: Mersenne Twister seeded from a hash."""
    digest = hashlib.sha256(f"{seed}:{label}".encode()).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


# ---------------------------------------------------------------------------
# topologies


class Topology:
    def __init__(self, tag: str, n: int, edges):
        self.tag = tag
        self.n = n
        width = max(2, len(str(n - 1)))
        self.node_ids = [f"n{i:0{width}d}" for i in range(n)]
        self.edges = sorted({(min(a, b), max(a, b)) for a, b in edges})
        adj: dict[int, set] = {i: set() for i in range(n)}
        for a, b in self.edges:
            if a == b:
                raise ValueError("self-loop in topology")
            adj[a].add(b)
            adj[b].add(a)
        self._neighbors = {
            self.node_ids[i]: tuple(self.node_ids[j] for j in sorted(adj[i]))
            for i in range(n)
        }
        if not self._connected(adj):
            raise ValueError("topology is not connected")

    @staticmethod
    def _connected(adj) -> bool:
        if not adj:
            return False
        seen, frontier = {0}, deque([0])
        while frontier:
            cur = frontier.popleft()
            for nxt in adj[cur]:
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
        return len(seen) == len(adj)

    def neighbors(self, node: str) -> tuple:
        return self._neighbors[node]

    def degree(self, node: str) -> int:
        return len(self._neighbors[node])

    def diameter(self) -> int:
        worst = 0
        for start in self.node_ids:
            dist = {start: 0}
            frontier = deque([start])
            while frontier:
                cur = frontier.popleft()
                for nxt in self._neighbors[cur]:
                    if nxt not in dist:
                        dist[nxt] = dist[cur] + 1
                        frontier.append(nxt)
            worst = max(worst, max(dist.values()))
        return worst


def build_mesh(n: int, degree: int = 4) -> Topology:
    """Circulant partial mesh: node k links to k +/- 1 .. k +/- degree/2 (mod n).

    Degree-regular, connected and full of short cycles, so the same
    information keeps arriving over multiple paths.
    """
    if degree < 2 or degree % 2:
        raise ValueError("degree must be even and at least 2")
    if n <= degree:
        raise ValueError("need more nodes than the degree")
    edges = []
    for k in range(n):
        for off in range(1, degree // 2 + 1):
            edges.append((k, (k + off) % n))
    return Topology("mesh", n, edges)


def build_tree(n: int) -> Topology:
    """Complete binary tree on n = 2^h - 1 nodes; the unique acyclic layout here."""
    if n < 3 or (n + 1) & n:
        raise ValueError("tree size must be 2^h - 1 with h >= 2")
    edges = []
    for i in range(n):
        for child in (2 * i + 1, 2 * i + 2):
            if child < n:
                edges.append((i, child))
    return Topology("tree", n, edges)


def build_topology(tag: str, n: int) -> Topology:
    if tag == "mesh":
        return build_mesh(n, 4)
    if tag == "tree":
        return build_tree(n)
    raise ValueError(f"unknown topology {tag!r}")


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class SimConfig:
    seed: int
    nodes: int
    topology: str
    protocol: str
    workload: MicroSpec | RetwisSpec
    ops_per_replica: int = 100
    sync_interval: int = 1
    delay_min: int = 1
    delay_max: int = 1
    dup_probability: float = 0.0
    quiesce_factor: int = 4
    memory_sample_every: int = 1
    collect_trace: bool = False

    def __post_init__(self):
        if self.nodes < 2:
            raise ValueError("need at least two nodes")
        if self.ops_per_replica < 0:
            raise ValueError("ops_per_replica must be non-negative")
        if self.sync_interval < 1:
            raise ValueError("sync_interval must be at least one tick")
        if self.delay_min < 1 or self.delay_max < self.delay_min:
            raise ValueError("need 1 <= delay_min <= delay_max")
        if not 0.0 <= self.dup_probability < 1.0:
            raise ValueError("duplication probability must be in [0, 1)")

    def echo(self) -> dict:
        return asdict(self)


# event phases within a tick
_OP, _DELIVER, _SYNC = 0, 1, 2


class _Sim:
    def __init__(self, config: SimConfig):
        self.config = config
        self.topo = build_topology(config.topology, config.nodes)
        self.workload = make_workload(config.workload, self.topo.node_ids)
        self.counters = {node: NodeCounters() for node in self.topo.node_ids}
        self.replicas: dict[str, dict] = {node: {} for node in self.topo.node_ids}
        self.wl_rngs = {node: split_rng(config.seed, f"wl:{node}") for node in self.topo.node_ids}
        self.net_rng = split_rng(config.seed, "net")
        self.heap: list = []
        self.seq = 0
        self.tick = 0
        self.last_sampled = -1
        self.memory_samples: list[tuple] = []
        self.channel_entries: dict[str, int] = {}
        self.hasher = hashlib.sha256()
        self.trace: list[str] | None = [] if config.collect_trace else None

    # -- infrastructure ------------------------------------------------------

    def push(self, tick, phase, item):
        self.seq += 1
        heapq.heappush(self.heap, (tick, phase, self.seq, item))

    def record(self, tick, seq, kind, src, dst, entries, metadata):
        line = f"{tick},{seq},{kind},{src},{dst},{entries},{metadata}"
        self.hasher.update(line.encode())
        self.hasher.update(b"\n")
        if self.trace is not None:
            self.trace.append(line)

    def replica(self, node, channel):
        per_node = self.replicas[node]
        r = per_node.get(channel)
        if r is None:
            r = make_replica(
                self.config.protocol,
                node,
                self.topo.neighbors(node),
                self.workload.bottom_for(channel),
                channel=channel,
                op_apply=apply_op,
                all_nodes=self.topo.node_ids,
            )
            per_node[channel] = r
        return r

    def send(self, env, now):
        c = self.counters[env.src]
        c.messages += 1
        c.sent_entries += env.entries
        c.sent_metadata += env.metadata
        family = env.channel.split(":", 1)[0]
        self.channel_entries[family] = self.channel_entries.get(family, 0) + env.entries
        self.seq += 1
        self.record(now, self.seq, f"send.{env.kind}", env.src, env.dst, env.entries, env.metadata)
        delay = self.net_rng.randint(self.config.delay_min, self.config.delay_max)
        self.push(now + delay, _DELIVER, ("deliver", env))
        if self.config.dup_probability and self.net_rng.random() < self.config.dup_probability:
            dup_delay = self.net_rng.randint(self.config.delay_min, self.config.delay_max)
            self.push(now + dup_delay, _DELIVER, ("deliver", env))

    def _attributed(self, node, fn):
        before = VISITS.count
        result = fn()
        self.counters[node].visits += VISITS.count - before
        return result

    # -- event handlers --------------------------------------------------------

    def handle_op(self, node, tick, seq):
        for action in self.workload.ops_for(node, tick, self.wl_rngs[node]):
            if isinstance(action, Op):
                r = self.replica(node, action.channel)
                self._attributed(node, lambda: r.on_operation(action.update))
            elif isinstance(action, Read):
                r = self.replica(node, action.channel)
                action.query(r.state)
                self.counters[node].reads += 1
            else:
                raise TypeError(f"unknown workload action {action!r}")
        self.record(tick, seq, "op", node, node, 0, 0)

    def handle_sync(self, node, tick):
        for channel in sorted(self.replicas[node]):
            r = self.replicas[node][channel]
            for env in self._attributed(node, r.sync_tick):
                self.send(env, tick)

    def handle_deliver(self, env, tick, seq):
        c = self.counters[env.dst]
        c.deliveries += 1
        c.received_entries += env.entries
        c.received_metadata += env.metadata
        self.record(tick, seq, f"recv.{env.kind}", env.src, env.dst, env.entries, env.metadata)
        r = self.replica(env.dst, env.channel)
        replies = self._attributed(env.dst, lambda: r.on_receive(env))
        for reply in replies:
            self.send(reply, tick)

    # -- main loop ---------------------------------------------------------------

    def sample_memory(self, tick):
        if tick < 0 or tick == self.last_sampled or tick % self.config.memory_sample_every:
            return
        self.last_sampled = tick
        for node in self.topo.node_ids:
            state = buffered = meta = 0
            for channel in self.replicas[node]:
                s, b, m = self.replicas[node][channel].memory_profile()
                state += s
                buffered += b
                meta += m
            self.memory_samples.append((tick, node, state, buffered, meta))

    def drain(self):
        while self.heap:
            tick, phase, seq, item = heapq.heappop(self.heap)
            if tick != self.tick:
                self.sample_memory(self.tick)
                self.tick = tick
            if item[0] == "op":
                self.handle_op(item[1], tick, seq)
            elif item[0] == "sync":
                self.handle_sync(item[1], tick)
            else:
                self.handle_deliver(item[1], tick, seq)
        self.sample_memory(self.tick)

    def views(self) -> list[dict]:
        out = []
        for node in self.topo.node_ids:
            view = {
                ch: r.state
                for ch, r in self.replicas[node].items()
                if not r.state.is_bottom()
            }
            out.append(view)
        return out

    def converged(self) -> bool:
        views = self.views()
        return all(v == views[0] for v in views[1:])

    def state_digest(self) -> str:
        """Hash of the first node's view; equal everywhere once converged."""
        view = self.views()[0]
        h = hashlib.sha256()
        for channel in sorted(view):
            h.update(f"{channel}={view[channel].encode()}\n".encode())
        return h.hexdigest()

    def run(self) -> RunMetrics:
        VISITS.reset()
        cfg = self.config
        for tick in range(1, cfg.ops_per_replica + 1):
            for node in self.topo.node_ids:
                self.push(tick, _OP, ("op", node))
            if tick % cfg.sync_interval == 0:
                for node in self.topo.node_ids:
                    self.push(tick, _SYNC, ("sync", node))
        self.drain()

        bound = max(4, cfg.quiesce_factor * self.topo.diameter())
        rounds = 0
        while not self.converged() and rounds < bound:
            rounds += 1
            start = self.tick + 1
            for node in self.topo.node_ids:
                self.push(start, _SYNC, ("sync", node))
            self.drain()

        converged = self.converged()
        final_view = {}
        if converged:
            final_view = {ch: state.encode() for ch, state in self.views()[0].items()}
        return RunMetrics(
            config=cfg.echo(),
            rng_name=RNG_NAME,
            converged=converged,
            convergence_tick=self.tick if converged else -1,
            per_node=self.counters,
            memory_samples=self.memory_samples,
            channel_entries=self.channel_entries,
            trace_hash=self.hasher.hexdigest(),
            final_state_digest=self.state_digest() if converged else "",
            final_view=final_view,
            trace=self.trace,
        )


def run(config: SimConfig) -> RunMetrics:
    """Execute one simulation; non-convergence is reported, not raised."""
    return _Sim(config).run()
