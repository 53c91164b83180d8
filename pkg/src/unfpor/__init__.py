"""Stateless optimal partial order reduction over event-structure unfoldings."""
from __future__ import annotations

from .errors import BoundExceeded, CorruptionError, DefinitionError, PreconditionError, UnfporError, UnknownEvent
from .events import BOTTOM, Event, PrefixStore
from .explorer import ExplorationReport, ExploreOptions, Explorer, run
from .system import (
    IndependenceRelation, SystemDef, check_unconditional_independence, load_petri_net, load_system,
    petri_net_from_dict, syntactic_independence, system_from_dict,
)

__all__ = [
    "BOTTOM", "BoundExceeded", "CorruptionError", "DefinitionError", "Event", "ExplorationReport",
    "ExploreOptions", "Explorer", "IndependenceRelation", "PrefixStore", "PreconditionError", "SystemDef",
    "UnfporError", "UnknownEvent", "check_unconditional_independence", "load_petri_net", "load_system",
    "petri_net_from_dict", "run", "syntactic_independence", "system_from_dict",
]
