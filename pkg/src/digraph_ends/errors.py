"""Exceptions and the certainty flag shared across the package."""

from __future__ import annotations

import enum
import math

INF = math.inf


class Certainty(str, enum.Enum):
    EXACT = "exact"
    PROVISIONAL = "provisional"

    @staticmethod
    def weakest(*values: "Certainty") -> "Certainty":
        if any(v is Certainty.PROVISIONAL for v in values):
            return Certainty.PROVISIONAL
        return Certainty.EXACT


def count_json(value: float) -> int | str:
    """Render a count that may be infinite."""
    return "inf" if value == INF else int(value)


class EndspaceError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 2


class InvalidInput(EndspaceError):
    exit_code = 2


class EmptySide(InvalidInput):
    pass


class UnknownVertex(InvalidInput):
    def __init__(self, vertex):
        super().__init__(f"unknown vertex {vertex!r}")
        self.vertex = vertex


class UnknownBuiltin(InvalidInput):
    pass


class BadParams(InvalidInput):
    pass


class SourceSyntaxError(InvalidInput):
    def __init__(self, line: int, column: int, message: str):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class SemanticError(InvalidInput):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class UnknownComponent(InvalidInput):
    pass


class LevelMismatch(InvalidInput):
    pass


class SideNotClassAligned(InvalidInput):
    pass


class NotStronglyConnected(EndspaceError):
    """Raised with an ordered pair ``(v, w)`` such that ``v`` cannot reach ``w``."""

    exit_code = 2

    def __init__(self, witness: tuple[str, str], level: int | None = None):
        where = "" if level is None else f" at level {level}"
        super().__init__(f"not strongly connected{where}: no path {witness[0]} -> {witness[1]}")
        self.witness = witness
        self.level = level


class BoundExceeded(EndspaceError):
    exit_code = 3


class DepthExceeded(BoundExceeded):
    pass


class OracleUnavailable(EndspaceError):
    exit_code = 3


class NonSolidAtLevel(EndspaceError):
    exit_code = 3

    def __init__(self, report, level: int | None = None):
        where = "" if level is None else f" at level {level}"
        super().__init__(f"source is not solid{where}: {report.describe()}")
        self.report = report
        self.level = level


class EulerConditionFailed(EndspaceError):
    exit_code = 2

    def __init__(self, witness):
        super().__init__(f"Euler condition fails: {witness.describe()}")
        self.witness = witness


class InvariantViolation(EndspaceError):
    """Internal consistency check failed; indicates a bug or a bad oracle."""

    exit_code = 4
