"""Uniform accounting of transmission, memory and metadata, plus CSV output.

All measurements are in *entries*, not bytes: a set element, a counter map
entry (two for a pos/neg pair) or a nested map leaf each weigh one unit.
Memory is the same entry-count footprint, never process RSS, so results are
portable and deterministic.  Processing cost is the element-visit counter
from ``crdtlab.lattice``, a deterministic proxy for CPU time.

CSV layout (``emit_csv``): one comment line ``# crdtlab-csv v1 <config json>``
carrying the schema version and the run configuration, then a header row
``node,series,tick,value`` and one row per (node, series, tick-or-total).
``parse_csv`` reads it back; round-tripping the summary table is exact.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

from .lattice import LatticeElement


def weigh(x: LatticeElement) -> int:
    """Metric weight of a lattice value in entries; bottom weighs zero."""
    return x.size_in_entries()


#: Counter series emitted per node, in stable column order.
NODE_SERIES = (
    "sent_entries",
    "sent_metadata",
    "messages",
    "received_entries",
    "received_metadata",
    "deliveries",
    "visits",
    "reads",
)


@dataclass
class NodeCounters:
    sent_entries: int = 0
    sent_metadata: int = 0
    messages: int = 0
    received_entries: int = 0
    received_metadata: int = 0
    deliveries: int = 0
    visits: int = 0
    reads: int = 0

    def as_dict(self):
        return {s: getattr(self, s) for s in NODE_SERIES}


@dataclass
class RunMetrics:
    """Everything measured in one simulation run."""

    config: dict
    rng_name: str
    converged: bool
    convergence_tick: int
    per_node: dict[str, NodeCounters]
    # (tick, node, state entries, buffer entries, metadata units)
    memory_samples: list[tuple] = field(default_factory=list)
    # entries sent per channel family ("obj", "wall", "timeline", ...)
    channel_entries: dict[str, int] = field(default_factory=dict)
    trace_hash: str = ""
    # digest of the converged state (canonical encodings of every object)
    final_state_digest: str = ""
    # converged state per object, in canonical encoding (empty if not converged)
    final_view: dict[str, str] = field(default_factory=dict)
    trace: list[str] | None = None

    def total(self, series: str) -> int:
        return sum(getattr(c, series) for c in self.per_node.values())

    @property
    def total_entries(self) -> int:
        return self.total("sent_entries")

    @property
    def total_metadata(self) -> int:
        return self.total("sent_metadata")

    @property
    def total_transmission(self) -> int:
        return self.total_entries + self.total_metadata

    @property
    def total_visits(self) -> int:
        return self.total("visits")

    def metadata_fraction(self) -> float:
        t = self.total_transmission
        return self.total_metadata / t if t else 0.0

    def byte_weighted_transmission(self, id_bytes: int = 31, content_bytes: int = 270) -> int:
        """Optional byte estimate: wall writes carry tweet content, every
        other entry an identifier-sized token."""
        total = 0
        for family, entries in self.channel_entries.items():
            per = content_bytes if family == "wall" else id_bytes
            total += per * entries
        return total

    def summary_rows(self) -> list[tuple]:
        """(node, series, tick, value) rows for the summary table."""
        rows = []
        for node in sorted(self.per_node):
            for series in NODE_SERIES:
                rows.append((node, series, "total", getattr(self.per_node[node], series)))
        for series in NODE_SERIES:
            rows.append(("all", series, "total", self.total(series)))
        rows.append(("all", "convergence_tick", "total", self.convergence_tick))
        rows.append(("all", "converged", "total", int(self.converged)))
        return rows

    def memory_rows(self) -> list[tuple]:
        rows = []
        for tick, node, state, buffered, meta in self.memory_samples:
            rows.append((node, "memory", str(tick), state + buffered + meta))
        return rows


CSV_VERSION = "crdtlab-csv v1"


def emit_csv(metrics: RunMetrics, stream, include_memory: bool = True) -> None:
    stream.write(f"# {CSV_VERSION} {json.dumps(metrics.config, sort_keys=True)}\n")
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(("node", "series", "tick", "value"))
    for row in metrics.summary_rows():
        writer.writerow(row)
    if include_memory:
        for row in metrics.memory_rows():
            writer.writerow(row)


def parse_csv(stream) -> tuple[dict, dict]:
    """Read an emitted CSV back into (config, {(node, series, tick): value})."""
    first = stream.readline().rstrip("\n")
    prefix = f"# {CSV_VERSION} "
    if not first.startswith(prefix):
        raise ValueError(f"not a {CSV_VERSION} file")
    config = json.loads(first[len(prefix):])
    reader = csv.reader(stream)
    header = next(reader, None)
    if header != ["node", "series", "tick", "value"]:
        raise ValueError("unexpected CSV header")
    rows = {}
    for node, series, tick, value in reader:
        rows[(node, series, tick)] = int(value)
    return config, rows


def summary_table(metrics: RunMetrics) -> dict:
    return {(n, s, t): v for n, s, t, v in metrics.summary_rows()}


def compare(baseline: RunMetrics, other: RunMetrics) -> dict[str, float]:
    """Ratios baseline/other for the aggregate series with nonzero divisors."""
    out = {}
    for series in NODE_SERIES:
        b, o = baseline.total(series), other.total(series)
        if o:
            out[series] = b / o
    b, o = baseline.total_transmission, other.total_transmission
    if o:
        out["transmission"] = b / o
    return out
