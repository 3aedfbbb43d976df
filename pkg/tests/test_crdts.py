"""Per-type behavior: update ops, decomposition rules, encodings, normal forms."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from crdtlab.crdts import (
    DIVIDES,
    GRID,
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
    add,
    gcounter_inc,
    gmap_update,
    gset_add,
    map_update,
    parse_gcounter,
    parse_gmap_of_gsets,
    parse_gset,
    parse_pncounter,
    pncounter_dec,
    pncounter_inc,
)
from crdtlab.lattice import IncompatibleLattice, decompose, derive_delta_mutator, join, leq

from . import strategies as ours
from .generators import TYPE_NAMES, VALUE_GENERATORS, rand_mutator

import random


# ---------------------------------------------------------------------------
# counters


def test_gcounter_inc_from_empty():
    state, d = gcounter_inc("A", GCounter())
    assert state == GCounter({"A": 1})
    assert d == GCounter({"A": 1})


def test_gcounter_inc_bumps_only_own_entry():
    state, d = gcounter_inc("A", GCounter({"A": 1, "B": 1}))
    assert state == GCounter({"A": 2, "B": 1})
    assert d == GCounter({"A": 2})
    assert join(GCounter({"A": 1, "B": 1}), d) == state


def test_gcounter_value_sums_entries():
    assert GCounter({"A": 2, "B": 2}).value() == 4
    assert GCounter().value() == 0


def test_gcounter_join_entrywise_max():
    assert join(GCounter({"A": 2, "B": 1}), GCounter({"A": 1, "B": 2})) == GCounter(
        {"A": 2, "B": 2}
    )


def test_gcounter_normal_form_drops_zeroes():
    assert GCounter({"A": 0, "B": 1}) == GCounter({"B": 1})
    with pytest.raises(ValueError):
        GCounter({"A": -1})


def test_pncounter_ops_and_value():
    state, d = pncounter_inc("A", PNCounter())
    assert state == PNCounter({"A": (1, 0)})
    assert d == PNCounter({"A": (1, 0)})
    state, d = pncounter_dec("A", state)
    assert state == PNCounter({"A": (1, 1)})
    assert d == PNCounter({"A": (0, 1)})
    assert PNCounter({"A": (2, 3), "B": (5, 5)}).value() == -1


def test_pncounter_dec_delta_is_minimal():
    x = PNCounter({"A": (1, 0)})

    def full_dec(p):
        cp, cn = p.entries.get("A", (0, 0))
        return PNCounter({**p.entries, "A": (cp, cn + 1)})

    assert derive_delta_mutator(full_dec)(x) == PNCounter({"A": (0, 1)})


def test_pncounter_decomposition_splits_components():
    got = decompose(PNCounter({"A": (2, 3), "B": (5, 5)}))
    assert set(got) == {
        PNCounter({"A": (2, 0)}),
        PNCounter({"A": (0, 3)}),
        PNCounter({"B": (5, 0)}),
        PNCounter({"B": (0, 5)}),
    }


# ---------------------------------------------------------------------------
# sets and maps


def test_gset_add():
    state, d = gset_add("a", GSet())
    assert state == GSet("a") and d == GSet("a")
    state, d = gset_add("a", GSet("a"))
    assert state == GSet("a") and d.is_bottom()
    state, d = gset_add("c", GSet("b"))
    assert state == GSet("bc") and d == GSet("c")


def test_gmap_update_deltas():
    empty = GMap(GSet())
    state, d = gmap_update("k", add("a"), empty)
    assert d == GMap(GSet(), {"k": GSet("a")})
    assert state == d
    # re-adding the same element is a no-op and ships bottom
    state2, d2 = gmap_update("k", add("a"), state)
    assert state2 == state
    assert d2.is_bottom()


def test_gmap_decomposition_recurses_per_key():
    x = GMap(GSet(), {"k1": GSet("ab"), "k2": GSet("c")})
    assert set(decompose(x)) == {
        GMap(GSet(), {"k1": GSet("a")}),
        GMap(GSet(), {"k1": GSet("b")}),
        GMap(GSet(), {"k2": GSet("c")}),
    }


def test_gmap_normal_form_drops_bottom_values():
    assert GMap(GSet(), {"k": GSet()}) == GMap(GSet())
    assert GMap(GSet(), {"k": GSet()}).is_bottom()


def test_gmap_value_type_is_enforced():
    with pytest.raises(IncompatibleLattice):
        GMap(GSet(), {"k": GCounter({"A": 1})})
    with pytest.raises(IncompatibleLattice):
        join(GMap(GSet(), {"k": GSet("a")}), GMap(GCounter()))


def test_nested_gmap_weight_and_decompose():
    inner = GMap(GSet(), {"i": GSet("ab")})
    outer = GMap(GMap(GSet()), {"o": inner})
    assert outer.size_in_entries() == 2
    assert set(decompose(outer)) == {
        GMap(GMap(GSet()), {"o": GMap(GSet(), {"i": GSet("a")})}),
        GMap(GMap(GSet()), {"o": GMap(GSet(), {"i": GSet("b")})}),
    }


# ---------------------------------------------------------------------------
# composition constructs


def test_pair_decomposition_rule():
    x = Pair(GSet("a"), GCounter({"A": 2}))
    assert set(decompose(x)) == {
        Pair(GSet("a"), GCounter()),
        Pair(GSet(), GCounter({"A": 2})),
    }


def test_lexpair_decomposition_keeps_version():
    x = LexPair(Nat(3), GSet("ab"))
    assert set(decompose(x)) == {LexPair(Nat(3), GSet("a")), LexPair(Nat(3), GSet("b"))}
    # blanked second component: the value is its own only piece
    assert decompose(LexPair(Nat(3), GSet())) == (LexPair(Nat(3), GSet()),)
    assert decompose(LexPair(Nat(0), GSet())) == ()


def test_lexpair_join_is_lexicographic():
    low = LexPair(Nat(1), GSet("ab"))
    high = LexPair(Nat(2), GSet("c"))
    assert join(low, high) == high
    assert join(high, low) == high
    tied = join(LexPair(Nat(2), GSet("a")), high)
    assert tied == LexPair(Nat(2), GSet("ac"))
    assert leq(low, high)


def test_lexpair_rejects_non_chain_first_component():
    with pytest.raises(IncompatibleLattice):
        LexPair(GSet("a"), GSet("b"))


def test_linear_sum_order_and_join():
    left = LinearSum.left(Nat(4))
    right = LinearSum.right(GSet("a"), Nat(0))
    assert leq(left, right)
    assert not leq(right, left)
    assert join(left, right) == right
    assert join(right, left) == right
    assert join(right, LinearSum.right(GSet("b"), Nat(0))) == LinearSum.right(GSet("ab"), Nat(0))


def test_linear_sum_decomposition():
    assert decompose(LinearSum.left(Nat(3))) == (LinearSum.left(Nat(3)),)
    got = decompose(LinearSum.right(GSet("ab"), Nat(0)))
    assert set(got) == {
        LinearSum.right(GSet("a"), Nat(0)),
        LinearSum.right(GSet("b"), Nat(0)),
    }
    # a right-tagged bottom is not the global bottom: it decomposes to itself
    rb = LinearSum.right(GSet(), Nat(0))
    assert not rb.is_bottom()
    assert decompose(rb) == (rb,)
    assert LinearSum.left(Nat(0)).is_bottom()


def test_maxset_keeps_only_maximal_elements():
    s = MaxSet(DIVIDES, (2, 3, 6, 4))
    assert s.elements == frozenset({6, 4})
    assert decompose(MaxSet(DIVIDES, (5,))) == (MaxSet(DIVIDES, (5,)),)
    grid = MaxSet(GRID, [(0, 1), (1, 0), (1, 1)])
    assert grid.elements == frozenset({(1, 1)})


@given(st.frozensets(st.sampled_from([1, 2, 3, 4, 6, 8, 12]), max_size=5),
       st.frozensets(st.sampled_from([1, 2, 3, 4, 6, 8, 12]), max_size=5))
def test_maxset_join_is_an_antichain(xs, ys):
    j = join(MaxSet(DIVIDES, xs), MaxSet(DIVIDES, ys))
    for a in j.elements:
        for b in j.elements:
            assert a == b or not DIVIDES.order_leq(a, b)


def test_maxset_orders_must_match():
    with pytest.raises(IncompatibleLattice):
        join(MaxSet(DIVIDES, (2,)), MaxSet(GRID, ((1, 1),)))


def test_chain_basics():
    assert join(Nat(2), Nat(5)) == Nat(5)
    assert decompose(Nat(5)) == (Nat(5),)
    assert decompose(Nat(0)) == ()
    assert join(Bool(False), Bool(True)) == Bool(True)
    assert decompose(Bool(True)) == (Bool(True),)
    with pytest.raises(ValueError):
        Nat(-1)


# ---------------------------------------------------------------------------
# mutator laws (full sweep lives in the acceptance suite)


@pytest.mark.parametrize("name", TYPE_NAMES)
def test_mutators_are_inflations_and_factor_through_deltas(name):
    rng = random.Random(1234)
    gen = VALUE_GENERATORS[name]
    for _ in range(50):
        x = gen(rng)
        full, optimal = rand_mutator(name, rng)
        y = full(x)
        assert leq(x, y), name
        d = derive_delta_mutator(full)(x)
        assert join(x, d) == y
        if optimal is not None:
            assert optimal(x) == d, name


# ---------------------------------------------------------------------------
# canonical encodings


@pytest.mark.parametrize(
    "value,expected",
    [
        (GCounter({"B": 7, "A": 5}), "A:5,B:7"),
        (GCounter(), ""),
        (GSet("cab"), "a,b,c"),
        (PNCounter({"A": (2, 3), "B": (5, 5)}), "A:2/3,B:5/5"),
        (GMap(GSet(), {"k2": GSet("c"), "k1": GSet("ba")}), "k1:{a,b},k2:{c}"),
        (Pair(GSet("a"), GCounter({"A": 2})), "(a|A:2)"),
        (LexPair(Nat(3), GSet("ab")), "<3|a,b>"),
        (LinearSum.right(GSet("a"), Nat(0)), "R:a"),
        (MaxSet(DIVIDES, (6, 4)), "4,6"),
        (Nat(7), "7"),
        (Bool(True), "1"),
    ],
)
def test_encodings_are_canonical(value, expected):
    assert value.encode() == expected


@pytest.mark.parametrize(
    "parse,values",
    [
        (parse_gset, ours.gsets),
        (parse_gcounter, ours.gcounters),
        (parse_pncounter, ours.pncounters),
        (parse_gmap_of_gsets, ours.gmaps),
    ],
)
@given(data=st.data())
def test_encoding_round_trips(parse, values, data):
    x = data.draw(values)
    assert parse(x.encode()) == x


@pytest.mark.parametrize(
    "parse,bad",
    [
        (parse_gcounter, "A:"),
        (parse_gcounter, "A:1,A:2"),
        (parse_pncounter, "A:1"),
        (parse_gmap_of_gsets, "k:{a"),
        (parse_gmap_of_gsets, "k:a}"),
    ],
)
def test_bad_encodings_are_rejected(parse, bad):
    with pytest.raises(ValueError):
        parse(bad)
