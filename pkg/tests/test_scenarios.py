"""Golden scripted traces for the delta variants."""

import pytest

from crdtlab.scenarios import DELTA_VARIANTS, GOLDEN, check_scenario, run_scenario


@pytest.mark.parametrize("name", ["fig4", "fig5"])
@pytest.mark.parametrize("protocol", DELTA_VARIANTS)
def test_scripted_traces_match_golden(name, protocol):
    _, diffs = check_scenario(name, protocol)
    assert diffs == []


def test_two_replica_trace_payload_totals():
    classic = run_scenario("fig4", "delta-classic")
    assert [r.payload for r in classic] == [("b",), ("a", "b"), ("a", "b", "c")]
    assert sum(r.entries for r in classic) == 6
    tagged = run_scenario("fig4", "delta-bp")
    assert [r.payload for r in tagged] == [("b",), ("a",), ("c",)]
    assert sum(r.entries for r in tagged) == 3


def test_diamond_trace_redundancy_removal():
    classic = {(r.step, r.dst): r for r in run_scenario("fig5", "delta-classic")}
    reduced = {(r.step, r.dst): r for r in run_scenario("fig5", "delta-rr")}
    # final hop to D: the stale element rides along only without stripping
    assert classic[("s7", "D")].entries == 2
    assert reduced[("s7", "D")].entries == 1
    assert reduced[("s7", "D")].payload == ("a",)


def test_diamond_trace_echo_suppression():
    tagged = {(r.step, r.dst): r for r in run_scenario("fig5", "delta-bp")}
    # nothing that B originated goes back to B
    assert tagged[("s6", "B")].payload == ("a",)


def test_golden_tables_cover_every_variant():
    for name in GOLDEN:
        assert set(GOLDEN[name]) == set(DELTA_VARIANTS)


def test_unknown_scenario_rejected():
    with pytest.raises(ValueError):
        run_scenario("fig9", "delta-classic")
