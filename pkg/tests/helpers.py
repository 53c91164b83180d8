from __future__ import annotations

import random

from unfpor.benchmarks import writer_readers, random_system
from unfpor.errors import BoundExceeded
from unfpor.explorer import run
from unfpor.system import SystemDef, reachable, system_from_dict

MAX_STATES = 300


def wr_system() -> SystemDef:
    return system_from_dict(writer_readers())


def xyz(sys: SystemDef, state) -> tuple[int, int, int]:
    v = sys.valuation(state)
    return v["x"], v["y"], v["z"]


def corpus(n: int, seed: int, looping: bool = False) -> list[SystemDef]:
    """``n`` random systems with at most 5 processes, 8 transitions, 300 reachable states."""
    rng = random.Random(seed)
    out = []
    while len(out) < n:
        doc = random_system(rng, looping=looping, max_transitions=8, max_procs=5)
        sys = system_from_dict(doc, name=f"rand{seed}_{len(out)}")
        try:
            reachable(sys, MAX_STATES)
        except BoundExceeded:
            continue
        out.append(sys)
    return out


def looping_corpus(n: int, seed: int, max_leaf: int = 12) -> list[SystemDef]:
    """Looping systems whose cutoff exploration ends with configurations of at most ``max_leaf`` events."""
    rng = random.Random(seed)
    out = []
    while len(out) < n:
        sys = system_from_dict(random_system(rng, looping=True, max_transitions=8, max_procs=5),
                               name=f"loop{seed}_{len(out)}")
        try:
            reachable(sys, MAX_STATES)
            rep = run(sys, cutoffs=True, max_events=5000)
        except BoundExceeded:
            continue
        if max(len(C) - 1 for C in rep.leaves) <= max_leaf:
            out.append(sys)
    return out
