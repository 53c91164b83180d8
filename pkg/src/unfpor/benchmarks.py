"""Deterministic benchmark families and a random system generator.

Families (all return plain JSON-ready dicts, see ``system_from_dict`` and
``petri_net_from_dict``):

``writer-readers``
    One writer ``w`` (``x := 1``) and two readers ``r`` (``y := x``) and
    ``r'`` (``z := x``).  Each process runs its single statement once,
    guarded by its own program counter.  The four deadlock states projected
    on ``(x, y, z)`` are (1,1,1), (1,0,1), (1,0,0) and (1,1,0).
``ccnf(n)``
    ``n - 1`` single-statement threads (``n`` odd); threads ``2k-1`` and
    ``2k`` race on writing ``v_k`` and touch nothing else, giving
    ``2 ** ((n - 1) / 2)`` traces and ``2 * (n - 1)`` events.
``readers(n)``
    A 1-safe net: ``n`` readers ``r_i`` move a private token ``a_i -> b_i``
    while reading the shared place ``p``; the post transition ``t``
    consumes ``p``.
``flip``
    A single process toggling ``x`` between 0 and 1 forever.
``prodcons(max)``
    Two producers and one consumer looping over two mutex-protected bounded
    buffers.
"""
from __future__ import annotations

import random
from typing import Any

from .errors import DefinitionError


def _pc(name: str, hi: int) -> dict[str, Any]:
    return {name: {"init": 0, "domain": [0, hi]}}


def writer_readers() -> dict[str, Any]:
    vars_ = {v: {"init": 0, "domain": [0, 1]} for v in ("x", "y", "z")}
    vars_ |= _pc("pc_w", 1) | _pc("pc_r", 1) | _pc("pc_r2", 1)
    return {
        "vars": vars_,
        "transitions": [
            {"id": "w", "process": "w", "guard": [["pc_w", "=", 0]],
             "effect": [["x", ":=", 1], ["pc_w", ":=", 1]]},
            {"id": "r", "process": "r", "guard": [["pc_r", "=", 0]],
             "effect": [["y", ":=", "x"], ["pc_r", ":=", 1]]},
            {"id": "r'", "process": "r'", "guard": [["pc_r2", "=", 0]],
             "effect": [["z", ":=", "x"], ["pc_r2", ":=", 1]]},
        ],
        "independence": "syntactic",
    }


def ccnf(n: int) -> dict[str, Any]:
    if n < 3 or n % 2 == 0:
        raise DefinitionError(f"ccnf needs an odd n >= 3, got {n}")
    threads = n - 1
    vars_: dict[str, Any] = {}
    transitions = []
    for k in range(1, threads // 2 + 1):
        vars_[f"v{k}"] = {"init": 0, "domain": [0, 2]}
    for i in range(1, threads + 1):
        k = (i + 1) // 2
        vars_ |= _pc(f"pc{i}", 1)
        transitions.append({
            "id": f"t{i}", "process": f"T{i}", "guard": [[f"pc{i}", "=", 0]],
            "effect": [[f"v{k}", ":=", 2 - i % 2], [f"pc{i}", ":=", 1]],
        })
    return {"vars": vars_, "transitions": transitions, "independence": "syntactic"}


def readers(n: int) -> dict[str, Any]:
    if n < 1:
        raise DefinitionError(f"readers needs n >= 1, got {n}")
    places = ["p", "q"] + [f"a{i}" for i in range(1, n + 1)] + [f"b{i}" for i in range(1, n + 1)]
    ts = [{"id": f"r{i}", "pre": [f"a{i}"], "post": [f"b{i}"], "read": ["p"]} for i in range(1, n + 1)]
    ts.append({"id": "t", "pre": ["p"], "post": ["q"], "read": []})
    return {"places": places, "marking": ["p"] + [f"a{i}" for i in range(1, n + 1)], "transitions": ts}


def flip() -> dict[str, Any]:
    return {
        "vars": {"x": {"init": 0, "domain": [0, 1]}},
        "transitions": [
            {"id": "up", "process": "p", "guard": [["x", "=", 0]], "effect": [["x", ":=", 1]]},
            {"id": "down", "process": "p", "guard": [["x", "=", 1]], "effect": [["x", ":=", 0]]},
        ],
        "independence": "syntactic",
    }


def prodcons(max_items: int) -> dict[str, Any]:
    if max_items < 1:
        raise DefinitionError(f"prodcons needs max >= 1, got {max_items}")
    vars_: dict[str, Any] = {
        "m1": {"init": 0, "domain": [0, 1]},
        "m2": {"init": 0, "domain": [0, 1]},
        "buf1": {"init": 0, "domain": [0, max_items]},
        "buf2": {"init": 0, "domain": [0, max_items]},
    }
    vars_ |= _pc("pc_p1", 2) | _pc("pc_p2", 2) | _pc("pc_c", 5)
    ts = []
    for i in (1, 2):
        pc, m, buf, proc = f"pc_p{i}", f"m{i}", f"buf{i}", f"prod{i}"
        ts += [
            {"id": f"p{i}_lock", "process": proc, "guard": [[pc, "=", 0], [m, "=", 0]],
             "effect": [[m, ":=", 1], [pc, ":=", 1]]},
            {"id": f"p{i}_inc", "process": proc, "guard": [[pc, "=", 1], [buf, "<", max_items]],
             "effect": [[buf, ":=", [buf, "+", 1]], [pc, ":=", 2]]},
            {"id": f"p{i}_full", "process": proc, "guard": [[pc, "=", 1], [buf, "=", max_items]],
             "effect": [[pc, ":=", 2]]},
            {"id": f"p{i}_unlock", "process": proc, "guard": [[pc, "=", 2]],
             "effect": [[m, ":=", 0], [pc, ":=", 0]]},
        ]
    for i in (1, 2):
        base = 3 * (i - 1)
        m, buf = f"m{i}", f"buf{i}"
        ts += [
            {"id": f"c_lock{i}", "process": "cons", "guard": [["pc_c", "=", base], [m, "=", 0]],
             "effect": [[m, ":=", 1], ["pc_c", ":=", base + 1]]},
            {"id": f"c_dec{i}", "process": "cons", "guard": [["pc_c", "=", base + 1], [buf, "!=", 0]],
             "effect": [[buf, ":=", [buf, "-", 1]], ["pc_c", ":=", base + 2]]},
            {"id": f"c_empty{i}", "process": "cons", "guard": [["pc_c", "=", base + 1], [buf, "=", 0]],
             "effect": [["pc_c", ":=", base + 2]]},
            {"id": f"c_unlock{i}", "process": "cons", "guard": [["pc_c", "=", base + 2]],
             "effect": [[m, ":=", 0], ["pc_c", ":=", (base + 3) % 6]]},
        ]
    return {"vars": vars_, "transitions": ts, "independence": "syntactic"}


FAMILIES = {
    "writer-readers": (writer_readers, False),
    "ccnf": (ccnf, True),
    "readers": (readers, True),
    "flip": (flip, False),
    "prodcons": (prodcons, True),
}


def generate(text: str) -> tuple[dict[str, Any], str]:
    """Generate ``FAMILY[:PARAM]``; returns the document and its frontend."""
    family, _, param = text.partition(":")
    if family not in FAMILIES:
        raise DefinitionError(f"unknown family {family!r}; expected one of {', '.join(FAMILIES)}")
    fn, takes = FAMILIES[family]
    if takes:
        try:
            value = int(param)
        except ValueError:
            raise DefinitionError(f"{family} needs an integer parameter, got {param!r}") from None
        doc = fn(value)
    else:
        if param:
            raise DefinitionError(f"{family} takes no parameter")
        doc = fn()
    return doc, ("petri-net" if family == "readers" else "system")


def random_system(rng: random.Random, looping: bool = False, max_transitions: int = 8,
                  max_procs: int = 4) -> dict[str, Any]:
    """A small random guarded-command system.

    Every process owns a program counter.  Without ``looping`` each
    transition strictly advances its counter, so every run terminates.  With
    ``looping`` some transitions jump backwards.
    """
    nprocs = rng.randint(2, max_procs)
    nshared = rng.randint(1, 3)
    shared = [f"g{i}" for i in range(nshared)]
    vars_: dict[str, Any] = {g: {"init": rng.randint(0, 1), "domain": [0, 2]} for g in shared}
    budget = rng.randint(nprocs + 1, max_transitions)
    per_proc = [1] * nprocs
    for _ in range(budget - nprocs):
        per_proc[rng.randrange(nprocs)] += 1
    ts = []
    ops = ["=", "!=", "<", "<="]
    for p in range(nprocs):
        npc = rng.randint(1, per_proc[p])
        vars_[f"pc{p}"] = {"init": 0, "domain": [0, npc]}
        for k in range(per_proc[p]):
            at = rng.randrange(npc) if k >= npc else k
            guard: list[list[Any]] = [[f"pc{p}", "=", at]]
            if rng.random() < 0.5:
                g = rng.choice(shared)
                rhs: Any = rng.choice(shared) if rng.random() < 0.3 else rng.randint(0, 2)
                if rhs != g:
                    guard.append([g, rng.choice(ops), rhs])
            if looping and rng.random() < 0.35:
                nxt = rng.randint(0, at)
            else:
                nxt = at + 1
            effect: list[list[Any]] = [[f"pc{p}", ":=", nxt]]
            targets = rng.sample(shared, k=min(len(shared), rng.choice([0, 1, 1, 2])))
            for g in targets:
                r = rng.random()
                if r < 0.4:
                    expr: Any = rng.randint(0, 2)
                elif r < 0.6:
                    expr = rng.choice(shared)
                else:
                    expr = [rng.choice(shared), rng.choice("+-"), 1]
                effect.append([g, ":=", expr])
            ts.append({"id": f"p{p}t{k}", "process": f"P{p}", "guard": guard, "effect": effect})
    return {"vars": vars_, "transitions": ts, "independence": "syntactic"}
