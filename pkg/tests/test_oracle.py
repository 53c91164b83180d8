from __future__ import annotations

import random

from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import wr_system
from unfpor.benchmarks import ccnf, flip, prodcons, random_system
from unfpor.events import BOTTOM, PrefixStore
from unfpor.explorer import run
from unfpor.oracle import (
    canonicalize, causal_past, cross_check, deadlocking_traces, enumerate_deadlocking_runs, events_by_runs,
    is_terminating, sub_configurations, trace_class,
)
from unfpor.system import IndependenceRelation, system_from_dict


def test_writer_readers_runs_and_traces():
    sys = wr_system()
    runs = enumerate_deadlocking_runs(sys)
    assert len(runs) == 6
    traces = deadlocking_traces(sys)
    assert len(traces) == 4
    assert ("r", "r'", "w") in traces


def test_canonicalize_needs_more_than_adjacent_swaps():
    # b and c are dependent; a commutes with both, so a moves to the front
    rel = IndependenceRelation.from_pairs("abc", [("b", "c")])
    assert canonicalize(["b", "c", "a"], rel).canonical_run == ("a", "b", "c")
    assert canonicalize(["c", "b", "a"], rel).canonical_run == ("a", "c", "b")


@settings(max_examples=80, deadline=None)
@given(st.lists(st.sampled_from("abcde"), max_size=7), st.sets(st.tuples(st.sampled_from("abcde"), st.sampled_from("abcde"))))
def test_canonical_form_is_least_in_class(run, pairs):
    rel = IndependenceRelation.from_pairs("abcde", pairs)
    cls = trace_class(run, rel)
    assert canonicalize(run, rel).canonical_run == min(cls)
    for other in cls:
        assert canonicalize(other, rel).canonical_run == min(cls)


def test_canonicalize_reports_state():
    sys = wr_system()
    c = canonicalize(["r", "w", "r'"], sys)
    assert c.reached == sys.fire(sys.fire(sys.fire(sys.initial, "r"), "w"), "r'")


def test_causal_past():
    rel = IndependenceRelation.from_pairs("abc", [("a", "b")])
    assert causal_past(["a", "c", "b"], rel) == ("a",)
    assert causal_past(["c", "a"], rel) == ()


def test_events_by_runs_on_ccnf():
    counts = events_by_runs(system_from_dict(ccnf(5)))
    assert sum(counts.values()) == 8


def test_termination_detection():
    assert is_terminating(wr_system())
    assert not is_terminating(system_from_dict(flip()))


def test_sub_configurations_of_chain():
    st = PrefixStore(system_from_dict(flip()))
    up = st.add_event("up", [])
    down = st.add_event("down", [up])
    subs = sub_configurations({BOTTOM, up, down}, st)
    assert sorted(map(len, subs)) == [1, 2, 3]


def test_cross_check_skips_traces_with_cutoffs():
    sys = system_from_dict(prodcons(1))
    v = cross_check(sys, run(sys))
    assert v.ok
    assert v.checks["traces"].status == "skip"
    assert v.checks["coverage"].status == "pass"


def test_cross_check_flags_duplicates():
    sys = wr_system()
    rep = run(sys, cutoffs=False)
    rep.leaves.append(rep.leaves[0])
    v = cross_check(sys, rep)
    assert v.checks["duplicates"].status == "fail"
    assert not v.ok


def test_cross_check_partial_on_bounds():
    sys = system_from_dict(ccnf(9))
    v = cross_check(sys, run(sys, cutoffs=False), max_states=10)
    assert {c.status for c in v.checks.values()} >= {"skip"}
    assert v.checks["duplicates"].status == "pass"


def test_random_system_generator_is_deterministic():
    a = random_system(random.Random(5), looping=True)
    b = random_system(random.Random(5), looping=True)
    assert a == b
