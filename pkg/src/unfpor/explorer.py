"""Stateless optimal exploration of the unfolding.

The explorer walks a binary call tree whose nodes are ``(C, D, A)``:
``C`` the configuration being extended, ``D`` the events already fully
explored from here (a sleep set) and ``A`` the events a previously found
alternative asks to be explored first.  The left child adds one enabled
event to ``C``; the right child, created only when an alternative exists,
keeps ``C`` and moves that event into ``D``.

Only the events in U are visible.  After a subtree is done, events no
longer needed to find future alternatives are moved from U to the cache G,
which can be pruned at will; cached events are re-adopted without being
rebuilt and also serve as witnesses for cutoffs.
"""
from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from typing import Any, Iterable

from .cutoff import CutoffIndex
from .errors import BoundExceeded, CorruptionError
from .events import BOTTOM, PrefixStore
from .system import GlobalState, SystemDef

ERROR_VAR = "__error"


@dataclass
class ExploreOptions:
    cutoffs: bool = True
    order: str = "size"
    policy: str = "ordered"
    seed: int = 0
    max_events: int | None = None
    max_depth: int | None = None
    cache: str = "none"
    record_tree: bool = False
    check_invariants: bool = False
    # fault injection: never take the right branch
    disable_alternatives: bool = False


def parse_cache_policy(text: str) -> tuple[str, int]:
    if text in ("none", "all"):
        return text, 0
    kind, _, n = text.partition(":")
    if kind == "lru" and n.isdigit():
        return "lru", int(n)
    raise ValueError(f"cache policy must be none, all or lru:N, got {text!r}")


@dataclass
class ExplorationNode:
    C: frozenset[int]
    D: frozenset[int]
    A: frozenset[int]
    chosen: int | None = None
    left: "ExplorationNode | None" = None
    right: "ExplorationNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.chosen is None

    def walk(self) -> Iterable["ExplorationNode"]:
        stack = [self]
        while stack:
            n = stack.pop()
            yield n
            if n.right is not None:
                stack.append(n.right)
            if n.left is not None:
                stack.append(n.left)

    def leaves(self) -> list[frozenset[int]]:
        return [n.C for n in self.walk() if n.is_leaf]


@dataclass
class ExplorationReport:
    max_configs: int = 0
    leaves: list[frozenset[int]] = field(default_factory=list)
    final_states: list[GlobalState] = field(default_factory=list)
    deadlocks: int = 0
    events_total: int = 0
    cutoffs: int = 0
    avg_U_at_leaves: float = 0.0
    time_ms: float = 0.0
    nodes: int = 0
    max_U: int = 0
    assertion_violations: int = 0
    witness: list[str] | None = None
    memory_checks: int = 0
    memory_violations: int = 0
    tree: ExplorationNode | None = None
    store: PrefixStore | None = field(default=None, repr=False)
    options: ExploreOptions | None = None

    def stats(self) -> dict[str, Any]:
        return {
            "events": self.events_total,
            "cutoffs": self.cutoffs,
            "max_configs": self.max_configs,
            "avg_U_at_leaves": round(self.avg_U_at_leaves, 3),
            "time_ms": round(self.time_ms, 3),
            "deadlocks": self.deadlocks,
            "nodes": self.nodes,
            "assertion_violations": self.assertion_violations,
        }


class _Frame:
    __slots__ = ("C", "D", "A", "state", "ex", "e", "phase", "node", "pre_ok")

    def __init__(self, C, D, A, state, ex, node):
        self.C = C
        self.D = D
        self.A = A
        self.state = state
        self.ex = ex
        self.e = None
        self.phase = 0
        self.node = node
        self.pre_ok = False


class Explorer:
    """One exploration run over one system (single-threaded, not reentrant)."""

    def __init__(self, sys: SystemDef, opts: ExploreOptions | None = None, store: PrefixStore | None = None):
        self.sys = sys
        self.opts = opts or ExploreOptions()
        self.store = store or PrefixStore(sys, self.opts.max_events)
        self.U: set[int] = {BOTTOM}
        self.G: dict[int, None] = {}  # insertion ordered, oldest first
        self.index = CutoffIndex(self.store, self.opts.order)
        self.index.add(BOTTOM)
        self.cache_kind, self.cache_size = parse_cache_policy(self.opts.cache)
        self.rng = random.Random(self.opts.seed)
        self.ever_in_U: set[int] = set()
        self.ever_cutoff: set[int] = set()
        self.withheld: set[int] = set()
        self.report = ExplorationReport(store=self.store, options=self.opts)
        self._error_idx = sys.var_index.get(ERROR_VAR)

    # -- live sets --------------------------------------------------------

    def _adopt(self, x: int) -> None:
        self.U.add(x)
        self.G.pop(x, None)
        self.withheld.discard(x)
        self.index.add(x)
        self.ever_in_U.add(x)
        self._check_error(self.store.events[x].local_state, self.store.events[x].local)

    def _to_cache(self, x: int) -> None:
        if x in self.U:
            self.U.discard(x)
            self.G[x] = None

    def prune_cache(self, policy: str | None = None) -> None:
        """Evict events from G per ``none``, ``all`` or ``lru:N``; U is untouched."""
        kind, size = (self.cache_kind, self.cache_size) if policy is None else parse_cache_policy(policy)
        if kind == "none":
            return
        keep = 0 if kind == "all" else size
        while len(self.G) > keep:
            x = next(iter(self.G))
            del self.G[x]
            self.index.discard(x)

    # -- the three procedures ----------------------------------------------

    def extend(self, C: frozenset[int], ex: Iterable[int] | None = None, cutoffs: bool | None = None) -> None:
        """Put every event of ``ex(C)`` in U, withholding cutoffs if enabled."""
        use_cut = self.opts.cutoffs if cutoffs is None else cutoffs
        if ex is None:
            ex = self.store.extensions(C)
        for x in sorted(ex):
            if x in self.U:
                continue
            if use_cut and self.index.corresponding(x) is not None:
                self.withheld.add(x)
                self.ever_cutoff.add(x)
                continue
            self._adopt(x)

    def enabled(self, C: frozenset[int], ex: Iterable[int]) -> list[int]:
        """``en(C) ∩ U``."""
        ev = self.store.events
        U = self.U
        return [x for x in ex if x in U and not ev[x].icfl & C]

    def conflicts_in_U(self, e: int) -> set[int]:
        return self.store.events[e].icfl & self.U

    def compute_q(self, C: Iterable[int], D: Iterable[int]) -> set[int]:
        """C ∪ D plus the local configurations of their immediate conflicts in U."""
        ev = self.store.events
        U = self.U
        Q = set(C) | set(D)
        for x in list(Q):
            for y in ev[x].icfl:
                if y in U and y not in Q:
                    Q |= ev[y].local
        return Q

    def remove(self, e: int, C: frozenset[int], D: frozenset[int]) -> None:
        ev = self.store.events
        Q = self.compute_q(C, D)
        if e not in Q:
            self._to_cache(e)
        for x in sorted(ev[e].icfl & self.U):
            for y in ev[x].local - Q:
                self._to_cache(y)
        self.prune_cache()

    def alternatives(self, C: frozenset[int], D: Iterable[int]) -> frozenset[int] | None:
        """One alternative to ``D`` after ``C`` built from events in U, or None.

        Each event of ``D`` not already in conflict with ``C`` must get an
        immediate-conflict partner; the candidate is a union of local
        configurations of such partners that stays conflict free with ``C``.
        """
        ev = self.store.events
        U = self.U
        key = self.store.order_key
        todo = [d for d in sorted(D, key=key) if not ev[d].icfl & C]
        cands = {d: sorted(ev[d].icfl & U, key=key) for d in todo}

        def search(i: int, J: frozenset[int]) -> frozenset[int] | None:
            while i < len(todo) and ev[todo[i]].icfl & J:
                i += 1
            if i == len(todo):
                return J
            for k in cands[todo[i]]:
                new = ev[k].local - C - J
                CJ = C | J | new
                if any(ev[y].icfl & CJ for y in new):
                    continue
                found = search(i + 1, J | new)
                if found is not None:
                    return found
            return None

        return search(0, frozenset())

    # -- hooks ---------------------------------------------------------------

    def _check_error(self, state: GlobalState, C: Iterable[int]) -> None:
        if self._error_idx is not None and state[self._error_idx]:
            self.report.assertion_violations += 1
            if self.report.witness is None:
                self.report.witness = self.store.run_of(C)

    def _node_invariants(self, f: _Frame) -> None:
        st = self.store
        ev = st.events
        C, D, A = f.C, f.D, f.A
        CA = C | A
        problems = []
        if C & A:
            problems.append("C ∩ A ≠ ∅")
        if not st.causally_closed(CA) or not st.conflict_free(CA):
            problems.append("C ∪ A is not a configuration")
        if not D <= f.ex:
            problems.append("D ⊄ ex(C)")
        if not A and any(not ev[d].icfl & C for d in D):
            problems.append("A = ∅ but D ⊄ cex(C)")
        if any(not ev[d].icfl & CA for d in D):
            problems.append("some d ∈ D has no immediate conflict in C ∪ A")
        if problems:
            raise CorruptionError(f"node ⟨{sorted(C)}|{sorted(D)}|{sorted(A)}⟩: " + "; ".join(problems))

    def _live_invariants(self) -> None:
        ev = self.store.events
        if self.U & self.G.keys():
            raise CorruptionError("U ∩ G ≠ ∅")
        if BOTTOM not in self.U:
            raise CorruptionError("bottom left U")
        for x in self.U:
            if not ev[x].causes <= self.U:
                raise CorruptionError(f"U not causally closed at {x}")

    def _memory_pre(self, f: _Frame) -> bool:
        Q = self.compute_q(f.C, f.D)
        if not Q <= self.U:
            return False
        ev = self.store.events
        en = {x for x in f.ex if not ev[x].icfl & f.C}
        return self.U <= Q | en

    def _memory_post(self, f: _Frame) -> None:
        if not f.pre_ok:
            return
        self.report.memory_checks += 1
        if self.U != self.compute_q(f.C, f.D):
            self.report.memory_violations += 1
            if self.opts.check_invariants:
                raise CorruptionError(f"U ≠ Q after Explore({sorted(f.C)}, {sorted(f.D)}, {sorted(f.A)})")

    # -- driver --------------------------------------------------------------

    def _choose(self, cands: list[int]) -> int:
        cands = sorted(cands, key=self.store.order_key)
        if self.opts.policy == "random":
            return self.rng.choice(cands)
        return cands[0]

    def _leaf(self, f: _Frame) -> None:
        rep = self.report
        rep.leaves.append(f.C)
        rep.final_states.append(f.state)
        rep.max_U = max(rep.max_U, len(self.U) - 1)
        self._u_sum += len(self.U) - 1
        if not self.sys.enabled_indices(f.state):
            rep.deadlocks += 1

    def run(self) -> ExplorationReport:
        t0 = time.perf_counter()
        self._u_sum = 0
        opts = self.opts
        st = self.store
        ev = st.events
        root_C = frozenset((BOTTOM,))
        root_node = ExplorationNode(root_C, frozenset(), frozenset()) if opts.record_tree else None
        stack = [_Frame(root_C, frozenset(), frozenset(), self.sys.initial,
                        frozenset(st.extensions(root_C)), root_node)]
        self._check_error(self.sys.initial, root_C)
        rep = self.report
        rep.tree = root_node
        while stack:
            f = stack[-1]
            if f.phase == 0:
                rep.nodes += 1
                if opts.check_invariants:
                    self._node_invariants(f)
                    f.pre_ok = self._memory_pre(f)
                self.extend(f.C, f.ex)
                en = self.enabled(f.C, f.ex)
                if not en:
                    self._leaf(f)
                    self._finish(stack.pop())
                    continue
                if f.A:
                    pick = [x for x in en if x in f.A]
                    if not pick:
                        raise CorruptionError(f"A ∩ en(C) empty at ⟨{sorted(f.C)}|{sorted(f.D)}|{sorted(f.A)}⟩")
                else:
                    pick = en
                e = self._choose(pick)
                if e in f.D:
                    raise CorruptionError(f"sleep-set blocked: chose {e} from D")
                f.e = e
                f.phase = 1
                if f.node is not None:
                    f.node.chosen = e
                C2 = f.C | {e}
                if opts.max_depth is not None and len(C2) - 1 > opts.max_depth:
                    raise BoundExceeded("depth", opts.max_depth)
                ex2 = (f.ex - {e}) | st.new_extensions(C2, e)
                node = ExplorationNode(C2, f.D, f.A - {e}) if f.node is not None else None
                if node is not None:
                    f.node.left = node
                s2 = self.sys.fire(f.state, ev[e].label)
                if s2 is None:
                    raise CorruptionError(f"event {e} enabled in C but its transition is not")
                self._check_error(s2, C2)
                stack.append(_Frame(C2, f.D, f.A - {e}, s2, frozenset(ex2), node))
            elif f.phase == 1:
                f.phase = 2
                D2 = f.D | {f.e}
                J = None if opts.disable_alternatives else self.alternatives(f.C, D2)
                if J is not None:
                    node = ExplorationNode(f.C, D2, J - f.C) if f.node is not None else None
                    if node is not None:
                        f.node.right = node
                    stack.append(_Frame(f.C, D2, J - f.C, f.state, f.ex, node))
            else:
                self.remove(f.e, f.C, f.D)
                self._finish(stack.pop())
        rep.max_configs = len(rep.leaves)
        rep.events_total = len(self.ever_in_U)
        rep.cutoffs = len(self.ever_cutoff)
        rep.avg_U_at_leaves = self._u_sum / rep.max_configs if rep.max_configs else 0.0
        rep.time_ms = (time.perf_counter() - t0) * 1000
        return rep

    def _finish(self, f: _Frame) -> None:
        if self.opts.check_invariants:
            self._memory_post(f)
            self._live_invariants()


def run(sys: SystemDef, opts: ExploreOptions | None = None, **kw: Any) -> ExplorationReport:
    """Explore ``sys`` to completion and return the report."""
    if opts is None:
        opts = ExploreOptions(**kw)
    elif kw:
        raise TypeError("pass either opts or keyword options")
    return Explorer(sys, opts).run()


def calltree_dot(root: ExplorationNode, name: str = "calltree") -> str:
    """Call tree in ``C | D | A`` node style (bottom omitted)."""

    def fmt(s: frozenset[int]) -> str:
        xs = sorted(x for x in s if x != BOTTOM)
        return ",".join(map(str, xs)) if xs else "∅"

    lines = [f"digraph {name} {{", "  node [shape=box];"]
    ids: dict[int, int] = {}
    for i, n in enumerate(root.walk()):
        ids[id(n)] = i
        lines.append(f'  n{i} [label="{fmt(n.C)} | {fmt(n.D)} | {fmt(n.A)}"];')
    for n in root.walk():
        if n.left is not None:
            lines.append(f'  n{ids[id(n)]} -> n{ids[id(n.left)]} [label="{n.chosen}"];')
        if n.right is not None:
            lines.append(f'  n{ids[id(n)]} -> n{ids[id(n.right)]} [style=dashed];')
    lines.append("}")
    return "\n".join(lines) + "\n"
