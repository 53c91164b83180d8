"""Cutoff detection over the events currently in U or G.

An event is a cutoff when some other live or cached event reaches the same
local state with a strictly smaller local configuration.  ``size`` compares
local configuration sizes only; ``total`` breaks size ties by
the sorted sequence of transition labels of the local configuration.
"""
from __future__ import annotations

from collections import defaultdict
from typing import TYPE_CHECKING

from .events import BOTTOM, PrefixStore
from .system import GlobalState

if TYPE_CHECKING:
    from .explorer import Explorer

ORDERS = ("size", "total")


class CutoffIndex:
    """Map from local state to the indexed events reaching it.

    Membership must mirror U ∪ G exactly; the explorer calls :meth:`add`
    when an event enters U and :meth:`discard` when it is evicted from G.
    """

    def __init__(self, store: PrefixStore, order: str = "size"):
        if order not in ORDERS:
            raise ValueError(f"unknown order {order!r}")
        self.store = store
        self.order = order
        self.by_state: dict[GlobalState, set[int]] = defaultdict(set)
        self._members: set[int] = set()
        self._parikh: dict[int, tuple[int, ...]] = {}

    def __contains__(self, eid: int) -> bool:
        return eid in self._members

    def __len__(self) -> int:
        return len(self._members)

    def add(self, eid: int) -> None:
        if eid not in self._members:
            self._members.add(eid)
            self.by_state[self.store.events[eid].local_state].add(eid)

    def discard(self, eid: int) -> None:
        if eid in self._members:
            self._members.discard(eid)
            bucket = self.by_state[self.store.events[eid].local_state]
            bucket.discard(eid)
            if not bucket:
                del self.by_state[self.store.events[eid].local_state]

    def _labels(self, eid: int) -> tuple[int, ...]:
        key = self._parikh.get(eid)
        if key is None:
            ev = self.store.events
            key = tuple(sorted(ev[x].label for x in ev[eid].local if x != BOTTOM))
            self._parikh[eid] = key
        return key

    def precedes(self, a: int, b: int) -> bool:
        """``[a]`` strictly before ``[b]`` in the configured order."""
        ev = self.store.events
        sa, sb = ev[a].local_size, ev[b].local_size
        if sa != sb or self.order == "size":
            return sa < sb
        return self._labels(a) < self._labels(b)

    def corresponding(self, eid: int) -> int | None:
        """Some indexed event witnessing that ``eid`` is a cutoff."""
        bucket = self.by_state.get(self.store.events[eid].local_state)
        if not bucket:
            return None
        for other in sorted(bucket):
            if other != eid and self.precedes(other, eid):
                return other
        return None


def is_cutoff(eid: int, idx: CutoffIndex, store: PrefixStore | None = None) -> bool:
    return idx.corresponding(eid) is not None


def extend_with_cutoffs(explorer: "Explorer", C: frozenset[int]) -> None:
    """Add the non-cutoff extensions of ``C`` to U (cutoffs are withheld)."""
    explorer.extend(C, cutoffs=True)
