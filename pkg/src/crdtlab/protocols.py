"""Replica synchronization protocols.

Eight interchangeable state machines share one event interface:

``state-based``      ship the full local state every round
``delta-classic``    buffer deltas, ship the joined buffer to every neighbor
``delta-bp``         classic, but a buffered group is never sent back to the
                     neighbor it arrived from
``delta-rr``         classic, but a received group is reduced to the part
                     that actually inflates the local state before buffering
``delta-bp-rr``      both optimizations
``scuttlebutt``      anti-entropy over a versioned delta store, reconciled
                     with summary-vector digests
``scuttlebutt-gc``   scuttlebutt plus safe deletion of deltas every node has
                     seen (digests carry the full seen-matrix)
``op-based``         causal broadcast of operations with store-and-forward

Replicas are single-threaded deterministic state machines; the simulator
owns them and serializes all events.  Channels are assumed reliable but may
reorder and duplicate; nothing here acknowledges or retransmits.

Size accounting contract (fixed at send time, per envelope kind):

===========  ==========================  ===============================
kind         entries                     metadata units
===========  ==========================  ===============================
``state``    weight of the full state    0
``delta``    weight of the delta group   1 (per-link sequence stamp)
``digest``   0                           summary-vector entries; for the
                                         gc variant, seen-matrix entries
``pairs``    sum of delta weights        1 per version pair
``ops``      1 per operation             vector-clock entries per op
===========  ==========================  ===============================

Stored link metadata (``link_metadata_units``) counts the per-neighbor
synchronization state a replica holds: a sequence counter per neighbor for
the delta family, the last digest received per neighbor for scuttlebutt
(a vector, or a matrix for the gc variant), and one vector clock per pending
operation per neighbor still owed a copy for op-based.  ``metadata_cost``
is the closed-form predictor for the same quantity.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from . import lattice
from .lattice import LatticeElement


class ProtocolError(Exception):
    """Malformed envelope: unknown sender or payload the protocol cannot take."""


@dataclass
class Envelope:
    """One simulated network message with its size precomputed."""

    src: str
    dst: str
    kind: str
    payload: object
    entries: int
    metadata: int
    channel: str = "obj"


@dataclass(frozen=True)
class LocalUpdate:
    """One local CRDT update: an optimal delta-mutator plus, for the
    op-based protocol, a portable operation descriptor."""

    dmut: Callable[[LatticeElement], LatticeElement]
    op: Optional[tuple] = None


class SyncReplica:
    """Common shape of a protocol instance at one node."""

    kinds: tuple[str, ...] = ()

    def __init__(self, node_id: str, neighbors, bottom: LatticeElement, channel: str = "obj"):
        self.id = node_id
        self.neighbors = tuple(sorted(neighbors))
        self.state = bottom
        self._bottom = bottom
        self.channel = channel

    def _validate(self, env: Envelope) -> None:
        if env.dst != self.id:
            raise ProtocolError(f"envelope for {env.dst} delivered to {self.id}")
        if env.src not in self.neighbors:
            raise ProtocolError(f"unknown sender {env.src}")
        if env.kind not in self.kinds:
            raise ProtocolError(f"{type(self).__name__} cannot handle {env.kind!r} envelopes")

    def _env(self, dst: str, kind: str, payload, entries: int, metadata: int) -> Envelope:
        return Envelope(self.id, dst, kind, payload, entries, metadata, self.channel)

    def on_operation(self, update: LocalUpdate) -> None:
        raise NotImplementedError

    def sync_tick(self) -> list[Envelope]:
        raise NotImplementedError

    def on_receive(self, env: Envelope) -> list[Envelope]:
        raise NotImplementedError

    def link_metadata_units(self) -> int:
        raise NotImplementedError

    def memory_profile(self) -> tuple[int, int, int]:
        """(state entries, buffered payload entries, metadata units) held now."""
        raise NotImplementedError


class StateBasedReplica(SyncReplica):
    """Full-state shipping; needs no synchronization metadata at all."""

    kinds = ("state",)

    def on_operation(self, update):
        d = update.dmut(self.state)
        self.state = lattice.join(self.state, d)

    def sync_tick(self):
        if self.state.is_bottom():
            return []
        w = self.state.size_in_entries()
        return [self._env(j, "state", self.state, w, 0) for j in self.neighbors]

    def on_receive(self, env):
        self._validate(env)
        self.state = lattice.join(self.state, env.payload)
        return []

    def link_metadata_units(self):
        return 0

    def memory_profile(self):
        return self.state.size_in_entries(), 0, 0


class DeltaReplica(SyncReplica):
    """Delta buffering with optional echo-avoidance and redundancy stripping.

    The buffer holds (delta, origin) pairs, origin being the neighbor the
    delta arrived from (or this node for local updates).  Every round the
    buffer is joined into one group per neighbor and then cleared; with
    ``avoid_echo`` the join skips entries whose origin is the target.  With
    ``strip_received`` an incoming group is first reduced to the minimum
    delta against the local state, so only genuinely new pieces are merged,
    buffered and forwarded.
    """

    kinds = ("delta",)

    def __init__(self, node_id, neighbors, bottom, channel="obj", *,
                 avoid_echo=False, strip_received=False):
        super().__init__(node_id, neighbors, bottom, channel)
        self.avoid_echo = avoid_echo
        self.strip_received = strip_received
        self.buffer: list[tuple[LatticeElement, str]] = []
        self.sync_seq = {j: 0 for j in self.neighbors}

    def _store(self, d, origin):
        self.state = lattice.join(self.state, d)
        entry = (d, origin)
        if entry not in self.buffer:
            self.buffer.append(entry)

    def on_operation(self, update):
        d = update.dmut(self.state)
        if not d.is_bottom():
            self._store(d, self.id)

    def sync_tick(self):
        return self.sync_to(self.neighbors)

    def sync_to(self, targets):
        """One synchronization round toward ``targets`` (scripted replays
        restrict these to part of the neighborhood); clears the buffer."""
        out = []
        for j in targets:
            parts = [s for s, o in self.buffer if not (self.avoid_echo and o == j)]
            group = lattice.join_all(parts, self._bottom)
            if group.is_bottom():
                continue
            self.sync_seq[j] += 1
            out.append(self._env(j, "delta", group, group.size_in_entries(), 1))
        self.buffer.clear()
        return out

    def on_receive(self, env):
        self._validate(env)
        d = env.payload
        if self.strip_received:
            d = lattice.delta(d, self.state)
            if not d.is_bottom():
                self._store(d, env.src)
        elif not lattice.leq(d, self.state):
            self._store(d, env.src)
        return []

    def link_metadata_units(self):
        return len(self.sync_seq)

    def memory_profile(self):
        buffered = sum(s.size_in_entries() for s, _ in self.buffer)
        return self.state.size_in_entries(), buffered, len(self.sync_seq)


class ScuttlebuttReplica(SyncReplica):
    """Anti-entropy over a store of versioned optimal deltas.

    Every local update is stored under a fresh version ``(node, seq)``.  The
    summary vector maps each origin to the highest *contiguous* sequence
    held, which keeps reconciliation correct under reordered delivery: a
    delta received ahead of a gap is stored but not summarized, so peers
    keep offering the missing versions until the gap closes.

    Each round a digest carrying the summary vector goes to every neighbor;
    the receiver replies with all stored pairs whose version the digest does
    not cover.  The gc variant additionally gossips its whole seen-matrix
    (everyone's summary vector, as far as known) inside the digest and
    deletes any stored delta once every node's row covers its version.
    """

    kinds = ("digest", "pairs")

    def __init__(self, node_id, neighbors, bottom, channel="obj", *,
                 gc=False, all_nodes=None):
        super().__init__(node_id, neighbors, bottom, channel)
        self.gc = gc
        if gc and not all_nodes:
            raise ValueError("gc variant needs the full membership for safe deletes")
        self.all_nodes = tuple(sorted(all_nodes)) if all_nodes else ()
        self.own_seq = 0
        self.store: dict[tuple[str, int], LatticeElement] = {}
        self.vector: dict[str, int] = {}
        self.peer_digests: dict[str, dict] = {}       # plain: vector per neighbor
        self.peer_matrices: dict[str, dict] = {}      # gc: matrix per neighbor
        self.seen: dict[str, dict[str, int]] = {}     # gc: merged seen-matrix

    def on_operation(self, update):
        d = update.dmut(self.state)
        if d.is_bottom():
            return
        self.state = lattice.join(self.state, d)
        self.own_seq += 1
        self.store[(self.id, self.own_seq)] = d
        self.vector[self.id] = self.own_seq
        if self.gc:
            self.seen[self.id] = dict(self.vector)

    def _digest_payload(self):
        if not self.gc:
            return dict(self.vector)
        self.seen[self.id] = dict(self.vector)
        matrix = {node: dict(row) for node, row in self.seen.items()}
        return dict(self.vector), matrix

    def sync_tick(self):
        out = []
        for j in self.neighbors:
            payload = self._digest_payload()
            if self.gc:
                meta = sum(len(row) for row in payload[1].values())
            else:
                meta = len(payload)
            out.append(self._env(j, "digest", payload, 0, meta))
        return out

    def _missing_pairs(self, their_vector):
        pairs = [
            (ver, d)
            for ver, d in self.store.items()
            if ver[1] > their_vector.get(ver[0], 0)
        ]
        pairs.sort(key=lambda vd: vd[0])
        return pairs

    def _advance_vector(self, origins):
        for origin in origins:
            s = self.vector.get(origin, 0)
            while (origin, s + 1) in self.store:
                s += 1
            if s:
                self.vector[origin] = s

    def _prune(self):
        dead = [
            ver
            for ver in self.store
            if all(self.seen.get(n, {}).get(ver[0], 0) >= ver[1] for n in self.all_nodes)
        ]
        for ver in dead:
            del self.store[ver]

    def on_receive(self, env):
        self._validate(env)
        if env.kind == "digest":
            if self.gc:
                their_vector, their_matrix = env.payload
                self.peer_matrices[env.src] = their_matrix
                for node, row in their_matrix.items():
                    mine = self.seen.setdefault(node, {})
                    for origin, s in row.items():
                        if s > mine.get(origin, 0):
                            mine[origin] = s
                self._prune()
            else:
                their_vector = env.payload
                self.peer_digests[env.src] = their_vector
            pairs = self._missing_pairs(their_vector)
            if not pairs:
                return []
            entries = sum(d.size_in_entries() for _, d in pairs)
            return [self._env(env.src, "pairs", tuple(pairs), entries, len(pairs))]
        # pairs
        touched = set()
        for ver, d in env.payload:
            if ver in self.store or ver[1] <= self.vector.get(ver[0], 0):
                continue  # duplicate (possibly already pruned)
            self.store[ver] = d
            self.state = lattice.join(self.state, d)
            touched.add(ver[0])
        self._advance_vector(touched)
        if self.gc and touched:
            self.seen[self.id] = dict(self.vector)
            self._prune()
        return []

    def link_metadata_units(self):
        if self.gc:
            return sum(
                sum(len(row) for row in matrix.values())
                for matrix in self.peer_matrices.values()
            )
        return sum(len(v) for v in self.peer_digests.values())

    def memory_profile(self):
        buffered = sum(d.size_in_entries() for d in self.store.values())
        meta = len(self.vector) + len(self.store) + self.link_metadata_units()
        if self.gc:
            meta += sum(len(row) for row in self.seen.values())
        return self.state.size_in_entries(), buffered, meta


@dataclass
class _PendingOp:
    op: tuple
    vclock: dict
    seen_by: set
    delivered: bool = False


class OpBasedReplica(SyncReplica):
    """Causal broadcast middleware with store-and-forward dissemination.

    Operations are tagged with a vector clock snapshot and delivered only
    once everything in their causal past has been delivered.  A first-seen
    operation enters the forwarding buffer; receiving a duplicate only
    records that the sender has a copy, trimming later transmissions.  An
    operation leaves the buffer once delivered locally and known to every
    neighbor.  Operations are shipped as-is: two increments stay two
    operations, nothing is compressed.
    """

    kinds = ("ops",)

    def __init__(self, node_id, neighbors, bottom, channel="obj", *, op_apply=None):
        super().__init__(node_id, neighbors, bottom, channel)
        if op_apply is None:
            raise ValueError("op-based replica needs an operation interpreter")
        self.op_apply = op_apply
        self.vclock: dict[str, int] = {}
        self.pending: dict[tuple[str, int], _PendingOp] = {}

    def on_operation(self, update):
        if update.op is None:
            raise ProtocolError("workload update carries no operation descriptor")
        self.vclock[self.id] = self.vclock.get(self.id, 0) + 1
        op_id = (self.id, self.vclock[self.id])
        d = self.op_apply(self.state, update.op)
        self.state = lattice.join(self.state, d)
        self.pending[op_id] = _PendingOp(update.op, dict(self.vclock), {self.id}, True)

    def sync_tick(self):
        out = []
        for j in self.neighbors:
            batch = [
                (op_id, p.op, dict(p.vclock))
                for op_id, p in sorted(self.pending.items())
                if j not in p.seen_by
            ]
            if not batch:
                continue
            meta = sum(len(vc) for _, _, vc in batch)
            out.append(self._env(j, "ops", tuple(batch), len(batch), meta))
            for op_id, _, _ in batch:
                # Channels are reliable: the copy will arrive.
                self.pending[op_id].seen_by.add(j)
        self._forget_settled()
        return out

    def _deliverable(self, origin, vc):
        if vc.get(origin, 0) != self.vclock.get(origin, 0) + 1:
            return False
        return all(s <= self.vclock.get(k, 0) for k, s in vc.items() if k != origin)

    def _deliver_ready(self):
        progress = True
        while progress:
            progress = False
            for op_id, p in sorted(self.pending.items()):
                if p.delivered:
                    continue
                origin = op_id[0]
                if self._deliverable(origin, p.vclock):
                    d = self.op_apply(self.state, p.op)
                    self.state = lattice.join(self.state, d)
                    self.vclock[origin] = op_id[1]
                    p.delivered = True
                    progress = True

    def _forget_settled(self):
        done = [
            op_id
            for op_id, p in self.pending.items()
            if p.delivered and all(j in p.seen_by for j in self.neighbors)
        ]
        for op_id in done:
            del self.pending[op_id]

    def on_receive(self, env):
        self._validate(env)
        for op_id, op, vc in env.payload:
            origin, seq = op_id
            known = self.pending.get(op_id)
            if known is not None:
                known.seen_by.add(env.src)
                continue
            if seq <= self.vclock.get(origin, 0):
                continue  # delivered and already forgotten
            self.pending[op_id] = _PendingOp(op, vc, {self.id, env.src, origin})
        self._deliver_ready()
        self._forget_settled()
        return []

    def link_metadata_units(self):
        return sum(
            len(p.vclock)
            for j in self.neighbors
            for p in self.pending.values()
            if j not in p.seen_by
        )

    def memory_profile(self):
        meta = sum(len(p.vclock) for p in self.pending.values()) + len(self.vclock)
        return self.state.size_in_entries(), len(self.pending), meta


PROTOCOLS = (
    "state-based",
    "delta-classic",
    "delta-bp",
    "delta-rr",
    "delta-bp-rr",
    "scuttlebutt",
    "scuttlebutt-gc",
    "op-based",
)

_DELTA_FLAGS = {
    "delta-classic": (False, False),
    "delta-bp": (True, False),
    "delta-rr": (False, True),
    "delta-bp-rr": (True, True),
}


def make_replica(protocol: str, node_id: str, neighbors, bottom: LatticeElement,
                 *, channel: str = "obj", op_apply=None, all_nodes=None) -> SyncReplica:
    """Build one protocol instance for a node."""
    if protocol == "state-based":
        return StateBasedReplica(node_id, neighbors, bottom, channel)
    if protocol in _DELTA_FLAGS:
        echo, strip = _DELTA_FLAGS[protocol]
        return DeltaReplica(node_id, neighbors, bottom, channel,
                            avoid_echo=echo, strip_received=strip)
    if protocol == "scuttlebutt":
        return ScuttlebuttReplica(node_id, neighbors, bottom, channel, gc=False)
    if protocol == "scuttlebutt-gc":
        return ScuttlebuttReplica(node_id, neighbors, bottom, channel,
                                  gc=True, all_nodes=all_nodes)
    if protocol == "op-based":
        return OpBasedReplica(node_id, neighbors, bottom, channel, op_apply=op_apply)
    raise ValueError(f"unknown protocol {protocol!r}")


def metadata_cost(protocol: str, n: int, p: int, u: int = 0) -> int:
    """Closed-form per-node metadata footprint, in vector entries.

    ``n`` is the node count, ``p`` the neighbor count, ``u`` the number of
    operations still pending propagation (op-based only).  Cross-checked
    against ``link_metadata_units`` in simulation.
    """
    if n < 1 or p < 1 or u < 0:
        raise ValueError("need n >= 1, p >= 1, u >= 0")
    if protocol == "state-based":
        return 0
    if protocol in _DELTA_FLAGS:
        return p
    if protocol == "scuttlebutt":
        return n * p
    if protocol == "scuttlebutt-gc":
        return n * n * p
    if protocol == "op-based":
        return n * p * u
    raise ValueError(f"unknown protocol {protocol!r}")
