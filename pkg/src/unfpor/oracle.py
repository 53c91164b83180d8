"""Brute-force ground truth over the interleaving semantics.

Everything here works on plain runs (sequences of transition ids) and
never looks at the unfolding, so it can be used to check the explorer.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

from .errors import BoundExceeded
from .events import BOTTOM, PrefixStore
from .system import (
    GlobalState, IndependenceRelation, SystemDef, check_unconditional_independence, reachable,
)

MAX_RUNS = 1_000_000
MAX_STATES = 100_000


@dataclass(frozen=True)
class TraceCanon:
    canonical_run: tuple[str, ...]
    reached: GlobalState | None = None


def enumerate_deadlocking_runs(sys: SystemDef, max_runs: int = MAX_RUNS, max_length: int = 10_000) -> list[tuple[str, ...]]:
    """All runs from the initial state that end in a deadlock."""
    ids = [t.id for t in sys.transitions]
    n = len(ids)
    out: list[tuple[str, ...]] = []
    run: list[str] = []
    # explicit DFS: (state, next transition to try, fired-any flag)
    stack: list[list[Any]] = [[sys.initial, 0, False]]
    visited_nodes = 0
    while stack:
        top = stack[-1]
        s, i, fired = top
        if i == n:
            if not fired:
                out.append(tuple(run))
                if len(out) > max_runs:
                    raise BoundExceeded("runs", max_runs)
            stack.pop()
            if run:
                run.pop()
            continue
        top[1] = i + 1
        s2 = sys.fire(s, i)
        if s2 is None:
            continue
        top[2] = True
        visited_nodes += 1
        if len(run) >= max_length:
            raise BoundExceeded("run length", max_length)
        if visited_nodes > 50 * max_runs:
            raise BoundExceeded("run prefixes", 50 * max_runs)
        run.append(ids[i])
        stack.append([s2, 0, False])
    return out


def _dependent(rel: IndependenceRelation | SystemDef, a: str, b: str) -> bool:
    if isinstance(rel, SystemDef):
        return rel.independence.dependent(a, b)
    return rel.dependent(a, b)


def canonicalize(run: Sequence[str], rel: IndependenceRelation | SystemDef, sys: SystemDef | None = None) -> TraceCanon:
    """Lexicographically least run equivalent to ``run``.

    Greedily emits the smallest id among the occurrences that no earlier
    pending dependent occurrence blocks; the result is the least
    linearization of the run's dependence graph.
    """
    if sys is None and isinstance(rel, SystemDef):
        sys = rel
    pending = list(run)
    out = []
    while pending:
        best = None
        for i, a in enumerate(pending):
            if any(_dependent(rel, pending[j], a) for j in range(i)):
                continue
            if best is None or a < pending[best]:
                best = i
        out.append(pending.pop(best))
    reached = None
    if sys is not None:
        reached = replay(sys, out)
    return TraceCanon(tuple(out), reached)


def replay(sys: SystemDef, run: Iterable[str]) -> GlobalState | None:
    s: GlobalState | None = sys.initial
    for t in run:
        s = sys.fire(s, t)
        if s is None:
            return None
    return s


def trace_class(run: Sequence[str], rel: IndependenceRelation | SystemDef) -> set[tuple[str, ...]]:
    """The whole equivalence class by adjacent independent swaps (small runs only)."""
    start = tuple(run)
    seen = {start}
    todo = [start]
    while todo:
        r = todo.pop()
        for i in range(len(r) - 1):
            if not _dependent(rel, r[i], r[i + 1]):
                r2 = r[:i] + (r[i + 1], r[i]) + r[i + 2:]
                if r2 not in seen:
                    seen.add(r2)
                    todo.append(r2)
    return seen


def reachable_states(sys: SystemDef, bound: int = MAX_STATES) -> set[GlobalState]:
    return reachable(sys, bound)


def is_terminating(sys: SystemDef, bound: int = MAX_STATES) -> bool:
    """True iff the reachable state graph is acyclic."""
    n = len(sys.transitions)
    succ: dict[GlobalState, list[GlobalState]] = {}
    for s in reachable(sys, bound):
        succ[s] = [s2 for t in range(n) if (s2 := sys.fire(s, t)) is not None]
    color: dict[GlobalState, int] = {}
    for root in succ:
        if root in color:
            continue
        color[root] = 1
        stack = [(root, iter(succ[root]))]
        while stack:
            s, it = stack[-1]
            for s2 in it:
                c = color.get(s2, 0)
                if c == 1:
                    return False
                if c == 0:
                    color[s2] = 1
                    stack.append((s2, iter(succ[s2])))
                    break
            else:
                color[s] = 2
                stack.pop()
    return True


def deadlocking_traces(sys: SystemDef, **bounds: int) -> set[tuple[str, ...]]:
    return {canonicalize(r, sys).canonical_run for r in enumerate_deadlocking_runs(sys, **bounds)}


def causal_past(run: Sequence[str], rel: IndependenceRelation | SystemDef) -> tuple[str, ...]:
    """The subsequence of ``run[:-1]`` that its last transition causally depends on."""
    if not run:
        return ()
    keep = [False] * len(run)
    keep[-1] = True
    for j in range(len(run) - 2, -1, -1):
        keep[j] = any(keep[k] and _dependent(rel, run[j], run[k]) for k in range(j + 1, len(run)))
    return tuple(a for a, k in zip(run[:-1], keep) if k)


def events_by_runs(sys: SystemDef, max_prefixes: int = MAX_RUNS) -> Counter[str]:
    """Count unfolding events per transition by enumerating every run.

    Each occurrence of ``t`` at the end of a run prefix determines one event,
    named by ``t`` and the trace of its causal past; the unfolding has one
    event per distinct name.  Only sensible for terminating systems.
    """
    names: set[tuple[str, tuple[str, ...]]] = set()
    ids = [t.id for t in sys.transitions]
    stack: list[tuple[GlobalState, tuple[str, ...]]] = [(sys.initial, ())]
    seen = 0
    while stack:
        s, run = stack.pop()
        for i, t in enumerate(ids):
            s2 = sys.fire(s, i)
            if s2 is None:
                continue
            seen += 1
            if seen > max_prefixes:
                raise BoundExceeded("run prefixes", max_prefixes)
            r2 = run + (t,)
            past = causal_past(r2, sys)
            names.add((t, canonicalize(past, sys).canonical_run))
            stack.append((s2, r2))
    return Counter(t for t, _ in names)


def sub_configurations(C: Iterable[int], store: PrefixStore, limit: int = 1 << 16) -> list[frozenset[int]]:
    """All causally closed subsets of configuration ``C`` (each contains bottom)."""
    ev = store.events
    members = frozenset(C) | {BOTTOM}
    start = frozenset((BOTTOM,))
    seen = {start}
    todo = [start]
    while todo:
        I = todo.pop()
        for x in members - I:
            if ev[x].causes <= I:
                I2 = I | {x}
                if I2 not in seen:
                    seen.add(I2)
                    if len(seen) > limit:
                        raise BoundExceeded("sub-configurations", limit)
                    todo.append(I2)
    return list(seen)


# -- cross checking ----------------------------------------------------------


@dataclass
class Check:
    status: str  # pass | fail | skip
    detail: str = ""
    counterexample: Any = None


@dataclass
class Verdict:
    checks: dict[str, Check] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(c.status != "fail" for c in self.checks.values())

    def summary(self) -> dict[str, Any]:
        return {
            name: {"status": c.status, "detail": c.detail,
                   **({"counterexample": c.counterexample} if c.counterexample is not None else {})}
            for name, c in self.checks.items()
        }


def cross_check(sys: SystemDef, report: Any, store: PrefixStore | None = None, cutoffs: bool | None = None,
                max_runs: int = MAX_RUNS, max_states: int = MAX_STATES) -> Verdict:
    """Compare an exploration report against the brute-force oracle.

    Checks: ``traces`` (leaf traces equal deadlocking traces; cutoffs off,
    terminating systems), ``duplicates`` (no leaf recorded twice),
    ``coverage`` (every reachable state is the state of a sub-configuration
    of some leaf) and ``independence`` (the relation really commutes).
    """
    store = store if store is not None else report.store
    cutoffs = report.options.cutoffs if cutoffs is None else cutoffs
    v = Verdict()

    dup = [C for C, k in Counter(report.leaves).items() if k > 1]
    if dup:
        v.checks["duplicates"] = Check("fail", f"{len(dup)} configuration(s) recorded twice", sorted(dup[0]))
    else:
        v.checks["duplicates"] = Check("pass", f"{len(report.leaves)} distinct leaves")

    try:
        ind = check_unconditional_independence(sys, bound=max_states)
        if ind.valid:
            v.checks["independence"] = Check("pass", f"{ind.pairs_checked} independent pairs over {ind.states_checked} states")
        else:
            x = ind.violations[0]
            v.checks["independence"] = Check(
                "fail", f"{len(ind.violations)} violation(s)",
                {"state": sys.valuation(x.state), "pair": [x.t, x.u], "clause": x.clause},
            )
    except BoundExceeded as exc:
        v.checks["independence"] = Check("skip", str(exc))

    try:
        terminating = is_terminating(sys, max_states)
    except BoundExceeded as exc:
        terminating = None
        v.checks["traces"] = Check("skip", str(exc))
    if terminating is not None:
        if cutoffs:
            v.checks["traces"] = Check("skip", "cutoffs on: leaf set may be smaller than the trace set")
        elif not terminating:
            v.checks["traces"] = Check("skip", "system has non-terminating runs")
        else:
            try:
                oracle = deadlocking_traces(sys, max_runs=max_runs)
                got = {canonicalize(store.run_of(C), sys).canonical_run for C in report.leaves}
                missing, extra = oracle - got, got - oracle
                if missing or extra:
                    cex = {"missing": list(min(missing)) if missing else None,
                           "extra": list(min(extra)) if extra else None}
                    v.checks["traces"] = Check("fail", f"{len(missing)} missing, {len(extra)} extra", cex)
                else:
                    v.checks["traces"] = Check("pass", f"{len(oracle)} = {len(got)} traces")
            except BoundExceeded as exc:
                v.checks["traces"] = Check("skip", str(exc))

    try:
        states = reachable_states(sys, max_states)
        covered = covered_states(report.leaves, store)
        missing_states = states - covered
        if missing_states:
            s = min(missing_states)
            v.checks["coverage"] = Check("fail", f"{len(missing_states)} of {len(states)} states uncovered", sys.valuation(s))
        else:
            v.checks["coverage"] = Check("pass", f"{len(states)} states covered")
    except BoundExceeded as exc:
        v.checks["coverage"] = Check("skip", str(exc))
    return v


def covered_states(leaves: Iterable[frozenset[int]], store: PrefixStore) -> set[GlobalState]:
    """States of all sub-configurations of the given configurations."""
    seen_confs: set[frozenset[int]] = set()
    states = set()
    for C in leaves:
        for I in sub_configurations(C, store):
            if I not in seen_confs:
                seen_confs.add(I)
                states.add(store.state_of(I))
    return states
