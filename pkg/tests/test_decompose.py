"""Decomposition invariants, checked per type and against the oracle.

For lex pairs and right-tagged sums the enumerable universe is an interval
whose least element is not the true bottom; a value that *is* that least
element decomposes structurally (to itself) rather than through the
interval, so the oracle comparisons skip exactly that edge.
"""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crdtlab.lattice import decompose, delta, join, join_all, leq
from crdtlab.oracle import FiniteLatticeOracle, UniverseTooLarge, enumerate_universe

from .strategies import ALL_TYPES


def _oracle_for(x, limit):
    try:
        return FiniteLatticeOracle(enumerate_universe(x, limit=limit))
    except UniverseTooLarge:
        return None


def _interval_edge(oracle, x):
    return x == oracle.bottom and not x.is_bottom()


@pytest.mark.parametrize("name,values", ALL_TYPES)
@given(data=st.data())
def test_decompose_soundness(name, values, data):
    x = data.draw(values)
    members = decompose(x)
    assert join_all(members, x.bottom()) == x
    assert len(set(members)) == len(members)
    assert all(not m.is_bottom() for m in members)
    # canonical order: sorted by encoding
    assert [m.encode() for m in members] == sorted(m.encode() for m in members)


@pytest.mark.parametrize("name,values", ALL_TYPES)
@given(data=st.data())
def test_decompose_irredundancy(name, values, data):
    x = data.draw(values)
    members = decompose(x)
    for i in range(len(members)):
        rest = members[:i] + members[i + 1 :]
        partial = join_all(rest, x.bottom())
        assert partial != x
        assert leq(partial, x)


@pytest.mark.parametrize("name,values", ALL_TYPES)
@settings(max_examples=30, deadline=None)
@given(data=st.data())
def test_decompose_members_pass_oracle_irreducibility(name, values, data):
    x = data.draw(values)
    oracle = _oracle_for(x, 512)
    if oracle is None or _interval_edge(oracle, x):
        return
    for m in decompose(x):
        assert oracle.is_join_irreducible(m)


@pytest.mark.parametrize("name,values", ALL_TYPES)
@settings(max_examples=25, deadline=None)
@given(data=st.data())
def test_decompose_equals_oracle_maximals(name, values, data):
    x = data.draw(values)
    oracle = _oracle_for(x, 512)
    if oracle is None or _interval_edge(oracle, x):
        return
    assert oracle.maximals_decomposition(x) == decompose(x)


@pytest.mark.parametrize("name,values", ALL_TYPES)
@settings(max_examples=15, deadline=None)
@given(data=st.data())
def test_exhaustive_search_finds_exactly_our_decomposition(name, values, data):
    x = data.draw(values)
    oracle = _oracle_for(x, 256)
    if oracle is None or _interval_edge(oracle, x):
        return
    try:
        found = oracle.irredundant_decompositions(x, max_irreducibles=12)
    except UniverseTooLarge:
        return
    assert found == [decompose(x)]


@pytest.mark.parametrize("name,values", ALL_TYPES)
@settings(max_examples=25, deadline=None)
@given(data=st.data())
def test_delta_minimality_against_enumerated_candidates(name, values, data):
    a = data.draw(values)
    b = data.draw(values)
    top = join(a, b)
    oracle = _oracle_for(top, 512)
    if oracle is None:
        return
    d = delta(a, b)
    for c in oracle.elements:
        if c.join(b) == top:
            assert leq(d, c)
    # the exhaustive least delta agrees whenever both operands are enumerable
    if a in oracle and b in oracle and d in oracle:
        assert oracle.minimal_delta(a, b) == d
