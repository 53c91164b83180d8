from __future__ import annotations

import itertools

import pytest

from helpers import corpus, wr_system, xyz
from unfpor.benchmarks import ccnf
from unfpor.errors import BoundExceeded, PreconditionError, UnknownEvent
from unfpor.events import BOTTOM, PrefixStore
from unfpor.oracle import canonicalize, deadlocking_traces, events_by_runs, replay, trace_class
from unfpor.system import system_from_dict


@pytest.fixture
def writer_readers_store():
    store = PrefixStore(wr_system())
    store.saturate()
    return store


def test_writer_readers_unfolding_shape(writer_readers_store):
    st = writer_readers_store
    assert len(st) - 1 == 10
    w0 = st.find("w", [])
    r0 = st.find("r", [])
    r20 = st.find("r'", [])
    assert None not in (w0, r0, r20)
    assert st.immediate_conflict(w0, r0) and st.immediate_conflict(w0, r20)
    assert not st.in_conflict(r0, r20)
    # w after both readers has two maximal causes
    w_after = st.find("w", [r0, r20])
    assert set(st[w_after].history_max) == {r0, r20}


def test_writer_readers_maximal_configuration_states(writer_readers_store):
    sys = writer_readers_store.sys
    maxis = writer_readers_store.saturate()
    states = sorted(xyz(sys, writer_readers_store.state_of(C)) for C in maxis)
    assert states == sorted([(1, 1, 1), (1, 0, 1), (1, 0, 0), (1, 1, 0)])


def test_add_event_is_idempotent(writer_readers_store):
    st = writer_readers_store
    w0 = st.find("w", [])
    n = len(st)
    assert st.add_event("r", [w0]) == st.find("r", [w0])
    assert st.add_event("r", {BOTTOM, w0}) == st.find("r", [w0])
    assert len(st) == n


def test_add_event_rejects_bad_histories(writer_readers_store):
    st = writer_readers_store
    w0, r0 = st.find("w", []), st.find("r", [])
    with pytest.raises(PreconditionError):
        st.add_event("r", [w0, r0])  # not conflict free
    r2 = st.find("r'", [])
    with pytest.raises(PreconditionError):
        st.add_event("r", [r2])  # r' is independent of r
    with pytest.raises(PreconditionError):
        st.add_event("w", [w0])  # w already fired
    with pytest.raises(UnknownEvent):
        st.add_event("w", [99])


def test_histories_in_configuration(writer_readers_store):
    st = writer_readers_store
    r0, r20 = st.find("r", []), st.find("r'", [])
    hs = {frozenset(h) - {BOTTOM} for h in st.histories({BOTTOM, r0, r20}, "w")}
    assert hs == {frozenset(), frozenset({r0}), frozenset({r20}), frozenset({r0, r20})}


def test_configuration_predicates(writer_readers_store):
    st = writer_readers_store
    w0, r0 = st.find("w", []), st.find("r", [])
    r_after = st.find("r", [w0])
    assert st.is_configuration({BOTTOM, w0, r_after})
    assert not st.is_configuration({BOTTOM, r_after})
    assert not st.is_configuration({BOTTOM, w0, r0})
    assert st.causally_before(w0, r_after)
    assert st.in_conflict(r0, r_after)  # inherited from w0 # r0


def test_extension_sets(writer_readers_store):
    st = writer_readers_store
    w0 = st.find("w", [])
    C = {BOTTOM, w0}
    en = st.enabled_events(C)
    assert {st.label_of(e) for e in en} == {"r", "r'"}
    cex = st.conflicting_extensions(C)
    assert {st.label_of(e) for e in cex} == {"r", "r'"}
    assert en.isdisjoint(cex)


def test_state_and_runs(writer_readers_store):
    st = writer_readers_store
    for C in st.saturate():
        run = st.run_of(C)
        assert replay(st.sys, run) == st.state_of(C)


def test_unknown_event_lookup(writer_readers_store):
    with pytest.raises(UnknownEvent):
        writer_readers_store[1000]
    with pytest.raises(KeyError):
        writer_readers_store.is_configuration({0, -3})


def test_store_event_bound():
    st = PrefixStore(system_from_dict(ccnf(9)), max_events=5)
    with pytest.raises(BoundExceeded, match="events"):
        st.saturate()


def test_dot_export(writer_readers_store):
    dot = writer_readers_store.to_dot()
    assert dot.startswith("digraph")
    assert dot.count("style=dotted") == sum(len(e.icfl) for e in writer_readers_store.events) // 2
    assert '"0:⊥"' in dot


def _brute_conflict(store: PrefixStore, maxis: list[frozenset[int]], a: int, b: int) -> bool:
    return not any(a in C and b in C for C in maxis)


@pytest.mark.parametrize("sys", corpus(12, seed=3), ids=lambda s: s.name)
def test_conflict_derivation_matches_brute_force(sys):
    st = PrefixStore(sys)
    maxis = st.saturate()
    n = len(st)
    for a, b in itertools.combinations(range(1, n), 2):
        assert st.in_conflict(a, b) == _brute_conflict(st, maxis, a, b), (a, b)
        # immediate conflict implies conflict and is symmetric
        if st.immediate_conflict(a, b):
            assert st.immediate_conflict(b, a) and st.in_conflict(a, b)


@pytest.mark.parametrize("sys", corpus(25, seed=4), ids=lambda s: s.name)
def test_saturation_matches_run_oracles(sys):
    st = PrefixStore(sys)
    maxis = st.saturate()
    # one event per distinct causal past of a transition occurrence
    per_label = {}
    for e in st.events[1:]:
        per_label[st.label_of(e.eid)] = per_label.get(st.label_of(e.eid), 0) + 1
    assert per_label == dict(events_by_runs(sys))
    # maximal configurations are in bijection with deadlocking traces
    traces = {canonicalize(st.run_of(C), sys).canonical_run for C in maxis}
    assert len(traces) == len(maxis)
    assert traces == deadlocking_traces(sys)


@pytest.mark.parametrize("sys", corpus(10, seed=5), ids=lambda s: s.name)
def test_linearizations_are_the_trace(sys):
    st = PrefixStore(sys)
    for C in st.saturate():
        run = st.run_of(C)
        cls = trace_class(run, sys)
        assert st.interleavings_count(C) == len(cls)
        for r in cls:
            assert replay(sys, r) == st.state_of(C)


@pytest.mark.parametrize("n, classic, arcs", [(2, 5, 4), (3, 16, 8), (4, 65, 16)])
def test_readers_post_copies_match_run_oracle(n, classic, arcs):
    from math import factorial

    from unfpor.benchmarks import readers
    from unfpor.system import petri_net_from_dict

    for mode, want in (("classic", classic), ("read-arcs", arcs)):
        sys = petri_net_from_dict(readers(n), mode)
        st = PrefixStore(sys)
        st.saturate()
        got = sum(1 for e in st.events[1:] if st.label_of(e.eid) == "t")
        assert got == events_by_runs(sys)["t"] == want
    # classic copies: one per ordered selection of readers that fired before t
    assert classic == sum(factorial(n) // factorial(n - k) for k in range(n + 1))
