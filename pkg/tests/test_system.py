from __future__ import annotations

import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import wr_system, xyz
from unfpor.benchmarks import ccnf, prodcons, random_system, readers
from unfpor.errors import BoundExceeded, DefinitionError
from unfpor.system import (
    IndependenceRelation, check_unconditional_independence, fire, load_petri_net, load_system,
    net_enabled, petri_net_from_dict, reachable, syntactic_independence, system_from_dict, system_to_dict,
)


def test_fire_follows_guards_and_effects():
    sys = wr_system()
    s = sys.initial
    assert fire(s, "r", sys) is not None
    s1 = sys.fire(s, "w")
    assert xyz(sys, s1) == (1, 0, 0)
    s2 = sys.fire(s1, "r")
    assert xyz(sys, s2) == (1, 1, 0)
    # each process runs once
    assert sys.fire(s2, "r") is None
    assert sys.enabled(s2) == {"r'"}


def test_out_of_domain_assignment_disables():
    doc = {
        "vars": {"x": {"init": 1, "domain": [0, 1]}},
        "transitions": [{"id": "inc", "process": "p", "guard": [], "effect": [["x", ":=", ["x", "+", 1]]]},
                        {"id": "dec", "process": "p", "guard": [], "effect": [["x", ":=", ["x", "-", 1]]]}],
    }
    sys = system_from_dict(doc)
    assert sys.fire(sys.initial, "inc") is None
    assert sys.fire(sys.initial, "dec") == (0,)


def test_guard_operators():
    doc = {
        "vars": {"x": {"init": 1, "domain": [0, 3]}, "y": {"init": 2, "domain": [0, 3]}},
        "transitions": [
            {"id": t, "process": t, "guard": [["x", op, rhs]], "effect": []}
            for t, op, rhs in [("a", "=", 1), ("b", "!=", 1), ("c", "<", "y"), ("d", "<=", 0),
                               ("e", "==", 1), ("f", "≤", "y")]
        ],
    }
    sys = system_from_dict(doc)
    assert sys.enabled(sys.initial) == {"a", "c", "e", "f"}


def test_syntactic_independence_on_writer_readers():
    rel = wr_system().independence
    assert rel.dependent("w", "r") and rel.dependent("w", "r'")
    assert rel.independent("r", "r'")
    assert rel.dependent("r", "r")


def test_writer_readers_syntactic_relation_is_sound():
    rep = check_unconditional_independence(wr_system())
    assert rep.valid
    assert rep.pairs_checked == 1


def test_wrong_relation_is_rejected_with_a_state():
    sys = wr_system()
    wrong = IndependenceRelation.from_pairs(["w", "r", "r'"], [("w", "r'")])  # claims w and r commute
    rep = check_unconditional_independence(sys, wrong)
    assert not rep.valid
    v = rep.violations[0]
    assert {v.t, v.u} == {"w", "r"}
    assert v.clause == "diamond"
    assert sys.fire(v.state, "w") is not None and sys.fire(v.state, "r") is not None


def test_explicit_relation_from_file():
    doc = json.loads(json.dumps(system_to_dict(wr_system(), explicit=True)))
    assert isinstance(doc["independence"], dict)
    sys = system_from_dict(doc)
    assert sys.independence == wr_system().independence


def test_round_trip_keeps_behaviour():
    sys = system_from_dict(prodcons(1))
    again = load_system(json.dumps(system_to_dict(sys)))
    assert reachable(again) == reachable(sys)
    assert again.independence == sys.independence


@pytest.mark.parametrize("text, fragment", [
    ('{"vars": {', "line 1, column 11"),
    ('{"vars": {}, "transitions": [{"id": "a", "effect": [["x", ":=", 1]]}]}', "unknown variable"),
    ('{"vars": {"x": {"init": 5, "domain": [0, 1]}}, "transitions": []}', "vars.x"),
    ('{"vars": {}, "transitions": [{"id": "a"}, {"id": "a"}]}', "duplicate"),
    ('{"vars": {"x": {"init": 0, "domain": [0, 1]}}, "transitions": '
     '[{"id": "a", "guard": [["x", "~", 1]]}]}', "transitions[0].guard[0]"),
    ('{"vars": {}, "transitions": [], "independence": {"dependent": [["a", "b"]]}}', "unknown transition"),
])
def test_load_errors_name_the_location(text, fragment):
    with pytest.raises(DefinitionError) as exc:
        load_system(text)
    assert fragment in str(exc.value)


def test_reachable_bound_aborts():
    with pytest.raises(BoundExceeded, match="reachable states"):
        reachable(system_from_dict(ccnf(9)), bound=10)


def test_petri_compilation_matches_net_enabledness():
    sys = petri_net_from_dict(readers(3))
    for s in reachable(sys):
        marking = frozenset(p for p, v in sys.valuation(s).items() if v)
        for t in sys.transitions:
            assert (sys.fire(s, t.id) is not None) == net_enabled(sys.net, marking, t.id)


def test_petri_dependence_modes():
    classic = petri_net_from_dict(readers(2), "classic").independence
    arcs = petri_net_from_dict(readers(2), "read-arcs").independence
    assert classic.dependent("r1", "r2")
    assert arcs.independent("r1", "r2")
    assert arcs.dependent("r1", "t") and classic.dependent("r1", "t")


def test_petri_relations_are_sound():
    for mode in ("classic", "read-arcs"):
        assert check_unconditional_independence(petri_net_from_dict(readers(3), mode)).valid


def test_petri_errors():
    with pytest.raises(DefinitionError, match="1-safe"):
        load_petri_net('{"places": ["p"], "marking": ["p", "p"], "transitions": []}')
    with pytest.raises(DefinitionError, match="unknown place"):
        load_petri_net('{"places": ["p"], "marking": [], "transitions": [{"id": "a", "pre": ["q"]}]}')
    with pytest.raises(DefinitionError, match="read place"):
        load_petri_net('{"places": ["p"], "marking": [], "transitions": [{"id": "a", "pre": ["p"], "read": ["p"]}]}')


def test_net_blocks_on_marked_postset():
    sys = load_petri_net('{"places": ["a", "b"], "marking": ["a", "b"], '
                         '"transitions": [{"id": "m", "pre": ["a"], "post": ["b"]}]}')
    assert sys.enabled(sys.initial) == set()


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.booleans())
def test_syntactic_independence_always_sound(seed, looping):
    sys = system_from_dict(random_system(random.Random(seed), looping=looping))
    try:
        rep = check_unconditional_independence(sys, syntactic_independence(sys), bound=2000)
    except BoundExceeded:
        return
    assert rep.valid, rep.violations[:1]
