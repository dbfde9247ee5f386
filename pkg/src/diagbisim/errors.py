"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class DiagBisimError(Exception):
    """Base class for all errors raised by diagbisim."""


class ParseError(DiagBisimError, ValueError):
    """Malformed input document or formula text."""

    def __init__(self, message: str, position: int | None = None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class ShapeError(ParseError):
    """A ragged matrix literal."""


class ShapeMismatch(DiagBisimError, ValueError):
    """Matrix dimensions do not fit the operation or the declared dims."""


class NotSquare(ShapeMismatch):
    pass


class NotAPoset(DiagBisimError, ValueError):
    """The order relation is cyclic, not reflexive, or not transitive."""


class NotFunctorial(DiagBisimError, ValueError):
    """Two paths between the same pair of objects compose to different matrices."""


class ObjectNotFound(DiagBisimError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "object not found"


class NotPositive(DiagBisimError, ValueError):
    """The model checker only handles formulas without negation."""


class CyclicLts(DiagBisimError, ValueError):
    """The reachable part of a transition system contains a cycle."""


class GridTooLarge(DiagBisimError, RuntimeError):
    """Deterministic solving would exceed the configured work limit."""
