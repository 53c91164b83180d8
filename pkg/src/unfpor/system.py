"""Finite concurrent systems as guarded-command transition systems.

A system is a set of bounded integer variables, an initial valuation and a
list of transitions.  Each transition is a guarded parallel assignment and
is a partial function on states: it is disabled when its guard is false or
when some assigned value falls outside the target variable's domain.

States are plain tuples of ints in variable declaration order; use
:meth:`SystemDef.valuation` to get a name -> value mapping.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from itertools import combinations
from typing import Any, Iterable, Mapping, Sequence

from .errors import BoundExceeded, DefinitionError

GlobalState = tuple[int, ...]

OPS = {
    "=": "=", "==": "=",
    "!=": "!=", "≠": "!=",
    "<": "<",
    "<=": "<=", "≤": "<=",
}


@dataclass(frozen=True)
class VarDecl:
    init: int
    lo: int
    hi: int


@dataclass(frozen=True)
class Atom:
    """``lhs op rhs`` where rhs is a constant or another variable."""

    lhs: str
    op: str
    rhs: int | str


@dataclass(frozen=True)
class Assign:
    """``target := src + offset``; a constant when ``src`` is None."""

    target: str
    src: str | None
    offset: int = 0


@dataclass(frozen=True)
class TransitionDef:
    id: str
    process: str
    guard: tuple[Atom, ...] = ()
    effect: tuple[Assign, ...] = ()

    @property
    def reads(self) -> frozenset[str]:
        names = set()
        for a in self.guard:
            names.add(a.lhs)
            if isinstance(a.rhs, str):
                names.add(a.rhs)
        for a in self.effect:
            if a.src is not None:
                names.add(a.src)
        return frozenset(names)

    @property
    def writes(self) -> frozenset[str]:
        return frozenset(a.target for a in self.effect)


@dataclass(frozen=True)
class IndependenceRelation:
    """Stored as its complement: the symmetric set of dependent id pairs.

    The diagonal is always dependent.  A pair is a frozenset of one id
    (diagonal) or two ids.
    """

    dependent_pairs: frozenset[frozenset[str]]

    @classmethod
    def from_pairs(cls, ids: Iterable[str], pairs: Iterable[Sequence[str]]) -> "IndependenceRelation":
        deps = {frozenset((i,)) for i in ids}
        deps.update(frozenset(p) for p in pairs)
        return cls(frozenset(deps))

    def dependent(self, a: str, b: str) -> bool:
        return a == b or frozenset((a, b)) in self.dependent_pairs

    def independent(self, a: str, b: str) -> bool:
        return not self.dependent(a, b)


def _eval_atom(op: str, x: int, y: int) -> bool:
    if op == "=":
        return x == y
    if op == "!=":
        return x != y
    if op == "<":
        return x < y
    return x <= y


class SystemDef:
    """A finite system: variables, transitions and an independence relation.

    Immutable after construction.  Transitions are addressed either by id or
    by their index in :attr:`transitions`; the explorer uses indices.
    """

    def __init__(
        self,
        variables: Mapping[str, VarDecl],
        transitions: Sequence[TransitionDef],
        independence: IndependenceRelation | None = None,
        name: str = "system",
    ):
        self.name = name
        self.net: dict[str, NetTransition] | None = None
        self.variables: dict[str, VarDecl] = dict(variables)
        self.transitions: tuple[TransitionDef, ...] = tuple(transitions)
        self.var_names: tuple[str, ...] = tuple(self.variables)
        self.var_index = {v: i for i, v in enumerate(self.var_names)}
        self.tindex: dict[str, int] = {}
        for i, t in enumerate(self.transitions):
            if t.id in self.tindex:
                raise DefinitionError(f"duplicate transition id {t.id!r}", f"transitions[{i}]")
            self.tindex[t.id] = i
        for v, d in self.variables.items():
            if d.lo > d.hi:
                raise DefinitionError(f"empty domain [{d.lo}, {d.hi}]", f"vars.{v}")
            if not d.lo <= d.init <= d.hi:
                raise DefinitionError(f"initial value {d.init} outside [{d.lo}, {d.hi}]", f"vars.{v}")
        self._compiled = [self._compile(i, t) for i, t in enumerate(self.transitions)]
        self.initial: GlobalState = tuple(d.init for d in self.variables.values())
        if independence is None:
            independence = syntactic_independence(self)
        self.independence = independence
        n = len(self.transitions)
        ids = [t.id for t in self.transitions]
        self.dep: list[list[bool]] = [
            [independence.dependent(ids[i], ids[j]) for j in range(n)] for i in range(n)
        ]
        self.dep_sets: list[frozenset[int]] = [
            frozenset(j for j in range(n) if self.dep[i][j]) for i in range(n)
        ]

    def _compile(self, i: int, t: TransitionDef):
        vi = self.var_index

        def idx(name: str, where: str) -> int:
            if name not in vi:
                raise DefinitionError(f"unknown variable {name!r}", f"transitions[{i}].{where}")
            return vi[name]

        guard = []
        for k, a in enumerate(t.guard):
            if a.op not in ("=", "!=", "<", "<="):
                raise DefinitionError(f"unknown operator {a.op!r}", f"transitions[{i}].guard[{k}]")
            lhs = idx(a.lhs, f"guard[{k}]")
            if isinstance(a.rhs, str):
                guard.append((lhs, a.op, True, idx(a.rhs, f"guard[{k}]")))
            else:
                guard.append((lhs, a.op, False, a.rhs))
        effect = []
        seen = set()
        for k, a in enumerate(t.effect):
            if a.target in seen:
                raise DefinitionError(f"variable {a.target!r} assigned twice", f"transitions[{i}].effect[{k}]")
            seen.add(a.target)
            tgt = idx(a.target, f"effect[{k}]")
            src = None if a.src is None else idx(a.src, f"effect[{k}]")
            d = self.variables[a.target]
            effect.append((tgt, src, a.offset, d.lo, d.hi))
        return tuple(guard), tuple(effect)

    # -- semantics -------------------------------------------------------

    def index(self, t: str | int | TransitionDef) -> int:
        if isinstance(t, int):
            return t
        if isinstance(t, TransitionDef):
            return self.tindex[t.id]
        return self.tindex[t]

    def fire(self, s: GlobalState, t: str | int | TransitionDef) -> GlobalState | None:
        """Successor of ``s`` under ``t``, or None when ``t`` is disabled."""
        guard, effect = self._compiled[self.index(t)]
        for lhs, op, is_var, rhs in guard:
            if not _eval_atom(op, s[lhs], s[rhs] if is_var else rhs):
                return None
        if not effect:
            return s
        out = list(s)
        for tgt, src, off, lo, hi in effect:
            v = off if src is None else s[src] + off
            if v < lo or v > hi:
                return None
            out[tgt] = v
        return tuple(out)

    def enabled(self, s: GlobalState) -> set[str]:
        return {t.id for i, t in enumerate(self.transitions) if self.fire(s, i) is not None}

    def enabled_indices(self, s: GlobalState) -> list[int]:
        return [i for i in range(len(self.transitions)) if self.fire(s, i) is not None]

    def dependent(self, a: str | int, b: str | int) -> bool:
        return self.dep[self.index(a)][self.index(b)]

    def valuation(self, s: GlobalState) -> dict[str, int]:
        return dict(zip(self.var_names, s))

    def state(self, **values: int) -> GlobalState:
        """Build a state from keyword values, defaulting to the initial ones."""
        base = dict(zip(self.var_names, self.initial))
        for k, v in values.items():
            if k not in base:
                raise KeyError(k)
            base[k] = v
        return tuple(base[v] for v in self.var_names)

    def label(self, t: int) -> str:
        return self.transitions[t].id

    def with_independence(self, rel: IndependenceRelation) -> "SystemDef":
        other = SystemDef(self.variables, self.transitions, rel, name=self.name)
        other.net = self.net
        return other

    def __repr__(self) -> str:
        return f"SystemDef({self.name!r}, vars={len(self.variables)}, transitions={len(self.transitions)})"


def fire(s: GlobalState, t: TransitionDef | str | int, sys: SystemDef) -> GlobalState | None:
    return sys.fire(s, t)


def enabled(s: GlobalState, sys: SystemDef) -> set[str]:
    return sys.enabled(s)


def syntactic_independence(sys: SystemDef) -> IndependenceRelation:
    """Footprint-based independence.

    Two transitions are dependent when they are the same, belong to the same
    process, or one writes a variable the other reads or writes.
    """
    ts = sys.transitions
    pairs = []
    for a, b in combinations(ts, 2):
        if (
            a.process == b.process
            or a.writes & (b.reads | b.writes)
            or b.writes & (a.reads | a.writes)
        ):
            pairs.append((a.id, b.id))
    return IndependenceRelation.from_pairs((t.id for t in ts), pairs)


def reachable(sys: SystemDef, bound: int = 100_000) -> set[GlobalState]:
    seen = {sys.initial}
    todo = deque([sys.initial])
    n = len(sys.transitions)
    while todo:
        s = todo.popleft()
        for t in range(n):
            s2 = sys.fire(s, t)
            if s2 is not None and s2 not in seen:
                seen.add(s2)
                if len(seen) > bound:
                    raise BoundExceeded("reachable states", bound)
                todo.append(s2)
    return seen


@dataclass(frozen=True)
class Violation:
    state: GlobalState
    t: str
    u: str
    clause: str  # "enabledness" or "diamond"


@dataclass
class IndependenceReport:
    states_checked: int
    pairs_checked: int
    violations: list[Violation] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.violations


def check_unconditional_independence(
    sys: SystemDef, rel: IndependenceRelation | None = None, bound: int = 100_000
) -> IndependenceReport:
    """Check that every independent pair commutes at every reachable state.

    Two clauses are checked at each reachable ``s`` for each independent
    ordered pair (t, u): if t is enabled, firing it neither enables nor
    disables u; if both are enabled, t.u and u.t reach the same state.
    """
    rel = rel if rel is not None else sys.independence
    ids = [t.id for t in sys.transitions]
    pairs = [(a, b) for a in ids for b in ids if a != b and rel.independent(a, b)]
    states = reachable(sys, bound)
    report = IndependenceReport(len(states), len(pairs) // 2)
    for s in sorted(states):
        for a, b in pairs:
            sa = sys.fire(s, a)
            if sa is None:
                continue
            b_here = sys.fire(s, b)
            if (b_here is not None) != (sys.fire(sa, b) is not None):
                report.violations.append(Violation(s, a, b, "enabledness"))
                continue
            if a < b and b_here is not None:
                ab = sys.fire(sa, b)
                ba = sys.fire(b_here, a)
                if ab is None or ba is None or ab != ba:
                    report.violations.append(Violation(s, a, b, "diamond"))
    return report


# -- loading -------------------------------------------------------------


def _parse_json(text: str | bytes) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DefinitionError(exc.msg, f"line {exc.lineno}, column {exc.colno}") from None


def _expect(cond: bool, msg: str, loc: str) -> None:
    if not cond:
        raise DefinitionError(msg, loc)


def _is_int(x: Any) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def system_from_dict(doc: Mapping[str, Any], name: str = "system") -> SystemDef:
    _expect(isinstance(doc, dict), "top level must be an object", "$")
    vars_doc = doc.get("vars")
    _expect(isinstance(vars_doc, dict), "'vars' must be an object", "vars")
    variables = {}
    for v, d in vars_doc.items():
        loc = f"vars.{v}"
        _expect(isinstance(d, dict) and "init" in d and "domain" in d, "needs 'init' and 'domain'", loc)
        dom = d["domain"]
        _expect(
            isinstance(dom, list) and len(dom) == 2 and all(_is_int(x) for x in dom),
            "domain must be [lo, hi]", loc,
        )
        _expect(_is_int(d["init"]), "init must be an integer", loc)
        variables[v] = VarDecl(d["init"], dom[0], dom[1])

    ts_doc = doc.get("transitions")
    _expect(isinstance(ts_doc, list), "'transitions' must be a list", "transitions")
    transitions = []
    for i, td in enumerate(ts_doc):
        loc = f"transitions[{i}]"
        _expect(isinstance(td, dict) and isinstance(td.get("id"), str), "needs a string 'id'", loc)
        guard = []
        for k, atom in enumerate(td.get("guard", [])):
            aloc = f"{loc}.guard[{k}]"
            _expect(isinstance(atom, list) and len(atom) == 3, "atom must be [lhs, op, rhs]", aloc)
            lhs, op, rhs = atom
            _expect(isinstance(lhs, str), "lhs must be a variable", aloc)
            _expect(op in OPS, f"unknown operator {op!r}", aloc)
            _expect(isinstance(rhs, str) or _is_int(rhs), "rhs must be a variable or integer", aloc)
            guard.append(Atom(lhs, OPS[op], rhs))
        effect = []
        for k, asg in enumerate(td.get("effect", [])):
            aloc = f"{loc}.effect[{k}]"
            _expect(isinstance(asg, list) and len(asg) == 3 and asg[1] == ":=", "assignment must be [var, \":=\", expr]", aloc)
            tgt, _, expr = asg
            _expect(isinstance(tgt, str), "target must be a variable", aloc)
            if _is_int(expr):
                effect.append(Assign(tgt, None, expr))
            elif isinstance(expr, str):
                effect.append(Assign(tgt, expr, 0))
            else:
                _expect(
                    isinstance(expr, list) and len(expr) == 3 and isinstance(expr[0], str)
                    and expr[1] in ("+", "-") and _is_int(expr[2]),
                    "expr must be int, var or [var, '+'|'-', int]", aloc,
                )
                off = expr[2] if expr[1] == "+" else -expr[2]
                effect.append(Assign(tgt, expr[0], off))
        transitions.append(TransitionDef(td["id"], str(td.get("process", td["id"])), tuple(guard), tuple(effect)))

    sys = SystemDef(variables, transitions, IndependenceRelation(frozenset()), name=name)
    indep = doc.get("independence", "syntactic")
    if indep == "syntactic":
        rel = syntactic_independence(sys)
    else:
        _expect(isinstance(indep, dict) and isinstance(indep.get("dependent"), list),
                "independence must be 'syntactic' or {'dependent': [...]}", "independence")
        for k, p in enumerate(indep["dependent"]):
            ploc = f"independence.dependent[{k}]"
            _expect(isinstance(p, list) and len(p) == 2, "pair must be [id, id]", ploc)
            for x in p:
                _expect(x in sys.tindex, f"unknown transition {x!r}", ploc)
        rel = IndependenceRelation.from_pairs(sys.tindex, indep["dependent"])
    return sys.with_independence(rel)


def load_system(text: str | bytes, name: str = "system") -> SystemDef:
    return system_from_dict(_parse_json(text), name)


def system_to_dict(sys: SystemDef, explicit: bool = False) -> dict[str, Any]:
    """Inverse of :func:`system_from_dict`."""

    def expr(a: Assign):
        if a.src is None:
            return a.offset
        if a.offset == 0:
            return a.src
        return [a.src, "+" if a.offset > 0 else "-", abs(a.offset)]

    doc: dict[str, Any] = {
        "vars": {v: {"init": d.init, "domain": [d.lo, d.hi]} for v, d in sys.variables.items()},
        "transitions": [
            {
                "id": t.id,
                "process": t.process,
                "guard": [[a.lhs, a.op, a.rhs] for a in t.guard],
                "effect": [[a.target, ":=", expr(a)] for a in t.effect],
            }
            for t in sys.transitions
        ],
    }
    if explicit:
        ids = [t.id for t in sys.transitions]
        doc["independence"] = {
            "dependent": [[a, b] for a, b in combinations(ids, 2) if sys.independence.dependent(a, b)]
        }
    else:
        doc["independence"] = "syntactic"
    return doc


# -- 1-safe Petri nets ---------------------------------------------------

NET_MODES = ("classic", "read-arcs")


@dataclass(frozen=True)
class NetTransition:
    id: str
    pre: frozenset[str]
    post: frozenset[str]
    read: frozenset[str]


def net_dependent(a: NetTransition, b: NetTransition, mode: str) -> bool:
    """Structural dependence between two net transitions.

    In classic mode read arcs count as consume-and-reproduce loops, so two
    readers of one place share a preset place.  In read-arcs mode only the
    read/read overlap is relaxed.
    """
    if a.id == b.id:
        return True
    if mode == "classic":
        pa, pb = a.pre | a.read, b.pre | b.read
        qa, qb = a.post | a.read, b.post | b.read
        return bool(qa & pb or qb & pa or pa & pb)
    return bool(
        a.post & (b.pre | b.read)
        or b.post & (a.pre | a.read)
        or a.pre & (b.pre | b.read)
        or b.pre & a.read
    )


def petri_net_from_dict(doc: Mapping[str, Any], dependence_mode: str = "classic", name: str = "net") -> SystemDef:
    if dependence_mode not in NET_MODES:
        raise DefinitionError(f"unknown dependence mode {dependence_mode!r}")
    _expect(isinstance(doc, dict), "top level must be an object", "$")
    places = doc.get("places")
    _expect(isinstance(places, list) and all(isinstance(p, str) for p in places), "'places' must be a list of names", "places")
    _expect(len(set(places)) == len(places), "duplicate place", "places")
    pset = set(places)
    marking = doc.get("marking", [])
    _expect(isinstance(marking, list), "'marking' must be a list", "marking")
    for k, p in enumerate(marking):
        _expect(p in pset, f"unknown place {p!r}", f"marking[{k}]")
    _expect(len(set(marking)) == len(marking), "place marked twice: initial marking is not 1-safe", "marking")

    nts = []
    seen = set()
    for i, td in enumerate(doc.get("transitions", [])):
        loc = f"transitions[{i}]"
        _expect(isinstance(td, dict) and isinstance(td.get("id"), str), "needs a string 'id'", loc)
        _expect(td["id"] not in seen, f"duplicate transition id {td['id']!r}", loc)
        seen.add(td["id"])
        arcs = {}
        for key in ("pre", "post", "read"):
            lst = td.get(key, [])
            _expect(isinstance(lst, list), f"'{key}' must be a list", f"{loc}.{key}")
            for k, p in enumerate(lst):
                _expect(p in pset, f"unknown place {p!r}", f"{loc}.{key}[{k}]")
            arcs[key] = frozenset(lst)
        _expect(not arcs["read"] & (arcs["pre"] | arcs["post"]), "read place also in pre or post", loc)
        nts.append(NetTransition(td["id"], arcs["pre"], arcs["post"], arcs["read"]))

    variables = {p: VarDecl(1 if p in marking else 0, 0, 1) for p in places}
    transitions = []
    for nt in nts:
        guard = [Atom(p, "=", 1) for p in sorted(nt.pre | nt.read)]
        guard += [Atom(p, "=", 0) for p in sorted(nt.post - nt.pre)]
        effect = [Assign(p, None, 0) for p in sorted(nt.pre - nt.post)]
        effect += [Assign(p, None, 1) for p in sorted(nt.post)]
        transitions.append(TransitionDef(nt.id, nt.id, tuple(guard), tuple(effect)))
    pairs = [(a.id, b.id) for a, b in combinations(nts, 2) if net_dependent(a, b, dependence_mode)]
    rel = IndependenceRelation.from_pairs((t.id for t in nts), pairs)
    sys = SystemDef(variables, transitions, rel, name=name)
    sys.net = {nt.id: nt for nt in nts}
    return sys


def load_petri_net(text: str | bytes, dependence_mode: str = "classic", name: str = "net") -> SystemDef:
    return petri_net_from_dict(_parse_json(text), dependence_mode, name)


def net_enabled(net: Mapping[str, NetTransition], marking: frozenset[str], tid: str) -> bool:
    """Plain 1-safe net enabledness (used to cross-check the compilation)."""
    nt = net[tid]
    return (nt.pre | nt.read) <= marking and not ((nt.post - nt.pre) & marking)
