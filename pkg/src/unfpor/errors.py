from __future__ import annotations


class UnfporError(Exception):
    """Base class for all errors raised by this package."""


class DefinitionError(UnfporError):
    """A system or net definition is malformed.

    ``location`` names the offending spot, e.g. ``transitions[2].guard[0]``
    or ``line 4, column 7`` for JSON syntax errors.
    """

    def __init__(self, message: str, location: str | None = None):
        self.location = location
        if location:
            message = f"{location}: {message}"
        super().__init__(message)


class BoundExceeded(UnfporError):
    """A hard exploration or enumeration bound was hit."""

    def __init__(self, bound: str, limit: int):
        self.bound = bound
        self.limit = limit
        super().__init__(f"bound exceeded: {bound} > {limit}")


class CorruptionError(UnfporError):
    """Internal invariant broken; signals a bug, never a user error."""


class UnknownEvent(UnfporError, KeyError):
    """An event handle that does not exist in the store."""

    def __str__(self) -> str:
        return f"unknown event {self.args[0]!r}"


class PreconditionError(UnfporError, ValueError):
    """An operation was called outside its documented precondition."""
