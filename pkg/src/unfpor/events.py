"""Incremental storage of the parametric unfolding of a system.

Events are identified canonically by ``(transition, causes)`` and stored in
an append-only arena addressed by dense integer handles.  Handle 0 is the
bottom event.  Immediate conflicts are recorded explicitly when an event is
inserted; general conflict is derived from them on demand.

Configurations are represented as sets of handles that always contain 0.
"""
from __future__ import annotations

from collections.abc import Collection, Iterable, Iterator
from typing import AbstractSet

from .errors import BoundExceeded, CorruptionError, PreconditionError, UnknownEvent
from .system import GlobalState, SystemDef

BOTTOM = 0
EPSILON = -1  # label of the bottom event


class Event:
    __slots__ = ("eid", "label", "causes", "local", "history_max", "icfl", "local_state", "local_size")

    def __init__(self, eid: int, label: int, causes: frozenset[int], history_max: tuple[int, ...],
                 local_state: GlobalState):
        self.eid = eid
        self.label = label
        self.causes = causes
        self.local = causes | {eid}
        self.history_max = history_max
        self.icfl: set[int] = set()
        self.local_state = local_state
        self.local_size = len(self.local)

    def __repr__(self) -> str:
        return f"Event({self.eid}, label={self.label}, max={list(self.history_max)})"


def maximal(events: Iterable[int], store: "PrefixStore") -> list[int]:
    """<-maximal members of a causally closed set."""
    evs = set(events)
    below: set[int] = set()
    for e in evs:
        below |= store.events[e].causes
    return sorted(evs - below)


class PrefixStore:
    """A finite prefix of the unfolding, grown on demand.

    ``max_events`` bounds the arena size (excluding bottom); exceeding it
    raises :class:`BoundExceeded`.
    """

    def __init__(self, sys: SystemDef, max_events: int | None = None):
        self.sys = sys
        self.max_events = max_events
        bottom = Event(BOTTOM, EPSILON, frozenset(), (), sys.initial)
        self.events: list[Event] = [bottom]
        self.dedup: dict[tuple[int, frozenset[int]], int] = {}
        self.by_label: list[list[int]] = [[] for _ in sys.transitions]
        self._states: dict[frozenset[int], GlobalState] = {frozenset((BOTTOM,)): sys.initial}

    def __len__(self) -> int:
        return len(self.events)

    def __getitem__(self, eid: int) -> Event:
        try:
            if eid < 0:
                raise IndexError
            return self.events[eid]
        except (IndexError, TypeError):
            raise UnknownEvent(eid) from None

    def label_of(self, eid: int) -> str:
        e = self[eid]
        return "⊥" if e.label == EPSILON else self.sys.transitions[e.label].id

    def order_key(self, eid: int) -> tuple[int, int]:
        """Deterministic event order: transition declaration order, then handle."""
        return (self.events[eid].label, eid)

    def find(self, t: str | int, causes: Iterable[int]) -> int | None:
        """Handle of the event ``<t, causes>`` if stored."""
        H = frozenset(causes) | {BOTTOM}
        return self.dedup.get((self.sys.index(t), H))

    # -- configurations ---------------------------------------------------

    def _check(self, eids: Iterable[int]) -> None:
        n = len(self.events)
        for e in eids:
            if not isinstance(e, int) or not 0 <= e < n:
                raise UnknownEvent(e)

    def closure(self, eids: Iterable[int]) -> frozenset[int]:
        out = {BOTTOM}
        for e in eids:
            out |= self.events[e].local
        return frozenset(out)

    def causally_closed(self, S: AbstractSet[int]) -> bool:
        return BOTTOM in S and all(self.events[e].causes <= S for e in S)

    def conflict_free(self, S: AbstractSet[int]) -> bool:
        """Conflict freedom of a causally closed set."""
        ev = self.events
        return all(not (ev[e].icfl & S) for e in S)

    def is_configuration(self, S: Collection[int]) -> bool:
        self._check(S)
        S = S if isinstance(S, (set, frozenset)) else set(S)
        return self.causally_closed(S) and self.conflict_free(S)

    def immediate_conflict(self, a: int, b: int) -> bool:
        self._check((a, b))
        return b in self.events[a].icfl

    def in_conflict(self, a: int, b: int) -> bool:
        """General conflict, derived from the recorded immediate conflicts."""
        self._check((a, b))
        la, lb = self.events[a].local, self.events[b].local
        return any(self.events[x].icfl & lb for x in la - lb)

    def causally_before(self, a: int, b: int) -> bool:
        self._check((a, b))
        return a in self.events[b].causes

    def linearize(self, C: Iterable[int]) -> list[int]:
        """One topological order of ``C`` without bottom."""
        ev = self.events
        return sorted((e for e in C if e != BOTTOM), key=lambda e: (ev[e].local_size, e))

    def run_of(self, C: Iterable[int]) -> list[str]:
        return [self.label_of(e) for e in self.linearize(C)]

    def state_of(self, C: Collection[int]) -> GlobalState:
        """State reached by any interleaving of ``C``."""
        key = C if isinstance(C, frozenset) else frozenset(C)
        s = self._states.get(key)
        if s is not None:
            return s
        if BOTTOM not in key:
            key = key | {BOTTOM}
            s = self._states.get(key)
            if s is not None:
                return s
        self._check(key)
        mx = maximal(key, self)
        if len(mx) == 1 and mx[0] != BOTTOM:
            return self.events[mx[0]].local_state
        s = self.sys.initial
        for e in self.linearize(key):
            s2 = self.sys.fire(s, self.events[e].label)
            if s2 is None:
                raise CorruptionError(f"replay of {sorted(key)} blocked at event {e}")
            s = s2
        self._states[key] = s
        return s

    def interleavings_count(self, C: Collection[int]) -> int:
        """Number of linear extensions of ``(C - {bottom}, <)``."""
        self._check(C)
        evs = [e for e in C if e != BOTTOM]
        pos = {e: i for i, e in enumerate(evs)}
        need = []
        for e in evs:
            m = 0
            for c in self.events[e].causes:
                if c != BOTTOM:
                    m |= 1 << pos[c]
            need.append(m)
        full = (1 << len(evs)) - 1
        memo = {full: 1}

        def count(done: int) -> int:
            if done in memo:
                return memo[done]
            total = 0
            for i in range(len(evs)):
                bit = 1 << i
                if not done & bit and need[i] & done == need[i]:
                    total += count(done | bit)
            memo[done] = total
            return total

        return count(0)

    # -- histories and insertion -------------------------------------------

    def _antichains(self, cands: list[int], chosen: list[int]) -> Iterator[list[int]]:
        ev = self.events

        def rec(i: int) -> Iterator[list[int]]:
            if i == len(cands):
                yield list(chosen)
                return
            yield from rec(i + 1)
            x = cands[i]
            lx = ev[x].local
            if all(c not in lx and x not in ev[c].local for c in chosen):
                chosen.append(x)
                yield from rec(i + 1)
                chosen.pop()

        return rec(0)

    def _histories(self, C: AbstractSet[int], t: int, must: int | None = None) -> Iterator[frozenset[int]]:
        ev = self.events
        dep = self.sys.dep[t]
        if must is None:
            cands = sorted(e for e in C if e != BOTTOM and dep[ev[e].label])
            chosen: list[int] = []
        else:
            lm = ev[must].local
            cands = sorted(
                e for e in C
                if e != BOTTOM and e != must and dep[ev[e].label] and e not in lm and must not in ev[e].local
            )
            chosen = [must]
        for ac in self._antichains(cands, chosen):
            H = self.closure(ac)
            if self.sys.fire(self.state_of(H), t) is not None:
                yield H

    def histories(self, C: Collection[int], t: str | int) -> list[frozenset[int]]:
        """All histories for ``t`` contained in configuration ``C``.

        A history is a sub-configuration enabling ``t`` whose maximal events
        are all dependent with ``t`` (or which is just bottom).  They are the
        down-closures of antichains of ``t``-dependent events.
        """
        self._check(C)
        C = C if isinstance(C, (set, frozenset)) else set(C)
        return list(self._histories(C, self.sys.index(t)))

    def add_event(self, t: str | int, H: Collection[int], check: bool = True) -> int:
        """Insert ``<t, H>`` (or return the existing handle)."""
        t = self.sys.index(t)
        H = frozenset(H) | {BOTTOM}
        eid = self.dedup.get((t, H))
        if eid is not None:
            return eid
        ev = self.events
        if check:
            self._check(H)
            if not self.is_configuration(H):
                raise PreconditionError(f"history {sorted(H)} is not a configuration")
            mx = maximal(H, self)
            if mx != [BOTTOM] and not all(self.sys.dep[t][ev[m].label] for m in mx):
                raise PreconditionError(f"maximal events of {sorted(H)} not all dependent with {self.sys.label(t)}")
        hmax = tuple(maximal(H, self))
        state = self.sys.fire(self.state_of(H), t)
        if state is None:
            if check:
                raise PreconditionError(f"{self.sys.label(t)} not enabled at state of {sorted(H)}")
            raise CorruptionError(f"{self.sys.label(t)} not enabled at state of {sorted(H)}")
        if self.max_events is not None and len(ev) > self.max_events:
            raise BoundExceeded("events", self.max_events)
        eid = len(ev)
        e = Event(eid, t, H, hmax, state)
        dep = self.sys.dep[t]
        for t2 in self.sys.dep_sets[t]:
            for x in self.by_label[t2]:
                if x in H:
                    continue
                other = ev[x]
                # [e] u ceil(x) must be conflict free: no t-dependent event of ceil(x) outside H
                if any(dep[ev[b].label] for b in other.causes - H if b != BOTTOM):
                    continue
                # ceil(e) u [x] conflict free
                if any(ev[y].icfl & H for y in other.local - H):
                    continue
                e.icfl.add(x)
        ev.append(e)
        for x in e.icfl:
            ev[x].icfl.add(eid)
        self.dedup[(t, H)] = eid
        self.by_label[t].append(eid)
        self._states[e.local] = state
        return eid

    # -- extensions -------------------------------------------------------

    def extensions(self, C: Collection[int]) -> set[int]:
        """``ex(C)``, computed constructively (events are inserted as needed)."""
        self._check(C)
        C = C if isinstance(C, (set, frozenset)) else set(C)
        out = set()
        for t in range(len(self.sys.transitions)):
            for H in self._histories(C, t):
                e = self.add_event(t, H, check=False)
                if e not in C:
                    out.add(e)
        return out

    def new_extensions(self, C: AbstractSet[int], e: int) -> set[int]:
        """Extensions of ``C`` whose history contains ``e`` (``e`` maximal in ``C``)."""
        out = set()
        for t in self.sys.dep_sets[self.events[e].label]:
            for H in self._histories(C, t, must=e):
                out.add(self.add_event(t, H, check=False))
        return out

    def enabled_events(self, C: Collection[int]) -> set[int]:
        """``en(C)``: extensions that keep ``C`` conflict free."""
        C = C if isinstance(C, (set, frozenset)) else set(C)
        return {e for e in self.extensions(C) if not self.events[e].icfl & C}

    def conflicting_extensions(self, C: Collection[int]) -> set[int]:
        """``cex(C)``: extensions in immediate conflict with some member of ``C``."""
        C = C if isinstance(C, (set, frozenset)) else set(C)
        return {e for e in self.extensions(C) if self.events[e].icfl & C}

    # -- whole-structure helpers -------------------------------------------

    def saturate(self, max_configs: int = 1_000_000) -> list[frozenset[int]]:
        """Build the whole (finite) unfolding; return its maximal configurations.

        Only terminates on systems whose runs all terminate; ``max_events``
        on the store is the guard for the others.
        """
        root = frozenset((BOTTOM,))
        seen = {root}
        stack = [(root, frozenset(self.extensions(root)))]
        maximal_confs = []
        while stack:
            C, ex = stack.pop()
            en = [x for x in ex if not self.events[x].icfl & C]
            if not en:
                maximal_confs.append(C)
                continue
            for x in en:
                C2 = C | {x}
                if C2 in seen:
                    continue
                seen.add(C2)
                if len(seen) > max_configs:
                    raise BoundExceeded("configurations", max_configs)
                ex2 = (ex - {x}) | self.new_extensions(C2, x)
                stack.append((C2, frozenset(ex2)))
        return maximal_confs

    def to_dot(self, eids: Iterable[int] | None = None, name: str = "unfolding") -> str:
        """Hasse diagram of causality plus dotted immediate-conflict edges."""
        keep = set(range(len(self.events))) if eids is None else set(eids) | {BOTTOM}
        lines = [f"digraph {name} {{", "  node [shape=box];"]
        for e in sorted(keep):
            lines.append(f'  e{e} [label="{e}:{self.label_of(e)}"];')
        for e in sorted(keep):
            for c in self.events[e].history_max:
                if c in keep:
                    lines.append(f"  e{c} -> e{e};")
        for e in sorted(keep):
            for x in sorted(self.events[e].icfl):
                if e < x and x in keep:
                    lines.append(f"  e{e} -> e{x} [style=dotted, dir=none, constraint=false];")
        lines.append("}")
        return "\n".join(lines) + "\n"
