"""Experiment runner CLI.

Subcommands:

``run SPEC.json``     execute every (protocol x seed) cell of an experiment
                      spec, one CSV per cell plus a combined summary and a
                      JSON sidecar with run metadata
``decompose T ENC``   print the irredundant join decomposition of a value
                      given in its canonical text encoding
``scenario NAME``     replay a scripted synchronization trace under all
                      delta variants and check it against the golden output
``compare A.csv B.csv``  ratios of A's aggregate series over B's

Exit codes: 0 success, 1 scenario mismatch, 2 bad usage or invalid spec,
3 simulation failed to converge.  Output directory comes from ``--out`` or
the ``CRDTLAB_OUT`` environment variable (default ``./out``).  Data files
carry no timestamps; reruns of the same spec are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import jsonschema

from .crdts import PARSERS
from .lattice import decompose
from .metrics import emit_csv, parse_csv
from .protocols import PROTOCOLS
from .scenarios import DELTA_VARIANTS, SCENARIOS, check_scenario
from .simnet import RNG_NAME, SimConfig, run
from .workloads import spec_from_dict

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_USAGE = 2
EXIT_NO_CONVERGENCE = 3

_MICRO_SCHEMA = {
    "type": "object",
    "properties": {
        "kind": {"enum": ["gset", "gcounter", "gmap"]},
        "percent": {"type": "number"},
        "keys": {"type": "integer", "minimum": 1},
    },
    "required": ["kind"],
    "additionalProperties": False,
}

_RETWIS_SCHEMA = {
    "type": "object",
    "properties": {
        "kind": {"const": "retwis"},
        "users": {"type": "integer", "minimum": 2},
        "zipf": {"type": "number"},
        "follow_pct": {"type": "integer"},
        "post_pct": {"type": "integer"},
        "timeline_pct": {"type": "integer"},
    },
    "required": ["kind"],
    "additionalProperties": False,
}

SPEC_SCHEMA = {
    "type": "object",
    "properties": {
        "name": {"type": "string", "minLength": 1},
        "nodes": {"type": "integer", "minimum": 2},
        "topology": {"enum": ["mesh", "tree"]},
        "protocols": {
            "type": "array",
            "items": {"enum": list(PROTOCOLS)},
            "minItems": 1,
        },
        "workload": {"oneOf": [_MICRO_SCHEMA, _RETWIS_SCHEMA]},
        "seed": {"type": "integer"},
        "seeds": {"type": "integer", "minimum": 1},
        "ops_per_replica": {"type": "integer", "minimum": 0},
        "sync_interval": {"type": "integer", "minimum": 1},
        "delay": {
            "type": "array",
            "items": {"type": "integer", "minimum": 1},
            "minItems": 2,
            "maxItems": 2,
        },
        "dup_probability": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
    },
    "required": ["name", "nodes", "topology", "protocols", "workload"],
    "additionalProperties": False,
}


def load_spec(path: str) -> dict:
    with open(path, encoding="utf-8") as f:
        spec = json.load(f)
    jsonschema.validate(spec, SPEC_SCHEMA)
    return spec


def config_from_spec(spec: dict, protocol: str, seed: int, collect_trace: bool = False) -> SimConfig:
    delay = spec.get("delay", [1, 1])
    return SimConfig(
        seed=seed,
        nodes=spec["nodes"],
        topology=spec["topology"],
        protocol=protocol,
        workload=spec_from_dict(spec["workload"]),
        ops_per_replica=spec.get("ops_per_replica", 100),
        sync_interval=spec.get("sync_interval", 1),
        delay_min=delay[0],
        delay_max=delay[1],
        dup_probability=spec.get("dup_probability", 0.0),
        collect_trace=collect_trace,
    )


def _out_dir(args) -> Path:
    out = args.out or os.environ.get("CRDTLAB_OUT") or "out"
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def cmd_run(args) -> int:
    try:
        spec = load_spec(args.spec)
    except (OSError, json.JSONDecodeError, jsonschema.ValidationError) as exc:
        print(f"error: invalid spec: {exc}", file=sys.stderr)
        return EXIT_USAGE

    base_seed = args.seed if args.seed is not None else spec.get("seed", 1)
    seeds = args.seeds if args.seeds is not None else spec.get("seeds", 1)
    if args.ops is not None:
        spec = dict(spec, ops_per_replica=args.ops)
    out = _out_dir(args)
    name = spec["name"]

    summary_lines = []
    sidecar = {"spec": spec, "rng": RNG_NAME, "cells": {}}
    failures = 0
    for protocol in spec["protocols"]:
        for k in range(seeds):
            seed = base_seed + k
            config = config_from_spec(spec, protocol, seed, collect_trace=args.trace)
            metrics = run(config)
            cell = f"{protocol}-seed{seed}"
            with open(out / f"{name}-{cell}.csv", "w", encoding="utf-8") as f:
                emit_csv(metrics, f)
            if args.trace and metrics.trace is not None:
                (out / f"{name}-{cell}.trace").write_text(
                    "\n".join(metrics.trace) + "\n", encoding="utf-8"
                )
            sidecar["cells"][cell] = {
                "converged": metrics.converged,
                "convergence_tick": metrics.convergence_tick,
                "trace_hash": metrics.trace_hash,
            }
            summary_lines.append(
                (
                    protocol,
                    seed,
                    int(metrics.converged),
                    metrics.convergence_tick,
                    metrics.total_entries,
                    metrics.total_metadata,
                    metrics.total_transmission,
                    metrics.total("messages"),
                    metrics.total_visits,
                )
            )
            status = "ok" if metrics.converged else "NO CONVERGENCE"
            print(
                f"{name} {protocol} seed={seed}: {status} "
                f"entries={metrics.total_entries} metadata={metrics.total_metadata} "
                f"tick={metrics.convergence_tick}"
            )
            if not metrics.converged:
                failures += 1

    with open(out / f"{name}-summary.csv", "w", encoding="utf-8") as f:
        f.write(
            "protocol,seed,converged,convergence_tick,"
            "sent_entries,sent_metadata,transmission,messages,visits\n"
        )
        for line in summary_lines:
            f.write(",".join(str(v) for v in line) + "\n")
    with open(out / f"{name}-meta.json", "w", encoding="utf-8") as f:
        json.dump(sidecar, f, indent=2, sort_keys=True)
        f.write("\n")

    return EXIT_NO_CONVERGENCE if failures else EXIT_OK


def cmd_decompose(args) -> int:
    parser = PARSERS.get(args.type)
    if parser is None:
        print(f"error: unknown type {args.type!r}, pick one of {sorted(PARSERS)}", file=sys.stderr)
        return EXIT_USAGE
    try:
        value = parser(args.value)
    except (ValueError, KeyError) as exc:
        print(f"error: cannot parse {args.value!r}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    members = decompose(value)
    if not members:
        print("(empty)")
    else:
        print(" ".join("{" + m.encode() + "}" for m in members))
    return EXIT_OK


def cmd_scenario(args) -> int:
    all_diffs = []
    for protocol in DELTA_VARIANTS:
        records, diffs = check_scenario(args.name, protocol)
        for record in records:
            print(f"{protocol}: {record.render()}")
        all_diffs.extend(f"{protocol}: {d}" for d in diffs)
    if all_diffs:
        print("-- trace mismatches --")
        for d in all_diffs:
            print(d)
        return EXIT_MISMATCH
    print("all variants match the expected trace")
    return EXIT_OK


def cmd_compare(args) -> int:
    try:
        with open(args.baseline, encoding="utf-8") as f:
            _, base = parse_csv(f)
        with open(args.other, encoding="utf-8") as f:
            _, other = parse_csv(f)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print("series,baseline,other,ratio")
    for key in sorted(base):
        node, series, tick = key
        if node != "all" or tick != "total":
            continue
        b, o = base[key], other.get(key)
        if not o:
            continue
        print(f"{series},{b},{o},{b / o:.4f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="crdtlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute an experiment spec")
    p_run.add_argument("spec", help="path to a JSON experiment spec")
    p_run.add_argument("--seeds", type=int, default=None, help="number of seeds per cell")
    p_run.add_argument("--seed", type=int, default=None, help="base seed override")
    p_run.add_argument("--ops", type=int, default=None, help="updates per replica override")
    p_run.add_argument("--out", default=None, help="output directory (or $CRDTLAB_OUT)")
    p_run.add_argument("--trace", action="store_true", help="also dump event traces")
    p_run.set_defaults(fn=cmd_run)

    p_dec = sub.add_parser("decompose", help="decompose an encoded lattice value")
    p_dec.add_argument("type", help=f"value type, one of {sorted(PARSERS)}")
    p_dec.add_argument("value", help="canonical encoding, e.g. 'A:5,B:7'")
    p_dec.set_defaults(fn=cmd_decompose)

    p_sc = sub.add_parser("scenario", help="replay a scripted golden trace")
    p_sc.add_argument("name", choices=SCENARIOS)
    p_sc.set_defaults(fn=cmd_scenario)

    p_cmp = sub.add_parser("compare", help="ratio of two run CSVs (baseline/other)")
    p_cmp.add_argument("baseline")
    p_cmp.add_argument("other")
    p_cmp.set_defaults(fn=cmd_compare)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
