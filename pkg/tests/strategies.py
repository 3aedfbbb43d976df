"""Hypothesis strategies for lattice values, kept small so ideals stay enumerable."""

import hypothesis.strategies as st

from crdtlab.crdts import (
    DIVIDES,
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

ids = st.sampled_from(["A", "B", "C"])
elems = st.sampled_from(list("abcde"))

nats = st.integers(0, 5).map(Nat)
bools = st.booleans().map(Bool)
gsets = st.frozensets(elems, max_size=5).map(GSet)
gcounters = st.dictionaries(ids, st.integers(1, 4), max_size=3).map(GCounter)
pncounters = st.dictionaries(
    ids, st.tuples(st.integers(0, 3), st.integers(0, 3)), max_size=2
).map(PNCounter)
gmaps = st.dictionaries(st.sampled_from(["k1", "k2"]), gsets, max_size=2).map(
    lambda d: GMap(GSet(), d)
)
pairs = st.tuples(gsets, gcounters).map(lambda t: Pair(*t))
lexpairs = st.tuples(nats, gsets).map(lambda t: LexPair(*t))
linearsums = st.one_of(
    nats.map(LinearSum.left),
    gsets.map(lambda s: LinearSum.right(s, Nat(0))),
)
maxsets = st.frozensets(st.sampled_from([1, 2, 3, 4, 6, 8, 12]), max_size=4).map(
    lambda s: MaxSet(DIVIDES, s)
)

ALL_TYPES = [
    ("nat", nats),
    ("bool", bools),
    ("gset", gsets),
    ("gcounter", gcounters),
    ("pncounter", pncounters),
    ("gmap", gmaps),
    ("pair", pairs),
    ("lexpair", lexpairs),
    ("linearsum", linearsums),
    ("maxset", maxsets),
]
