"""CRDT synchronization lab.

A library of state-based CRDTs with irredundant join decompositions and
optimal deltas, eight pluggable replica synchronization protocols, and a
deterministic network simulator with a benchmark CLI.
"""

from .lattice import (
    IncompatibleLattice,
    LatticeElement,
    VISITS,
    decompose,
    delta,
    derive_delta_mutator,
    join,
    join_all,
    leq,
)
from .crdts import (
    Bool,
    GCounter,
    GMap,
    GSet,
    LexPair,
    LinearSum,
    MaxSet,
    Nat,
    Pair,
    PNCounter,
)
from .oracle import FiniteLatticeOracle

__all__ = [
    "Bool",
    "FiniteLatticeOracle",
    "GCounter",
    "GMap",
    "GSet",
    "IncompatibleLattice",
    "LatticeElement",
    "LexPair",
    "LinearSum",
    "MaxSet",
    "Nat",
    "Pair",
    "PNCounter",
    "VISITS",
    "decompose",
    "delta",
    "derive_delta_mutator",
    "join",
    "join_all",
    "leq",
]
