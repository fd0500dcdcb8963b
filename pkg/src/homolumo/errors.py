"""Exception hierarchy shared by the library and the CLI."""

from __future__ import annotations


class HomoLumoError(Exception):
    """Base class for all library errors."""


class GraphFormatError(HomoLumoError, ValueError):
    """Malformed graph input.

    ``line`` and ``column`` are 1-based and set only for syntax errors.
    """

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class NotInvertibleError(HomoLumoError, ValueError):
    """An adjacency matrix that must be invertible is singular."""


class NotBridgeableError(HomoLumoError, ValueError):
    """The requested bridge vertices are not arbitrarily bridgeable."""


class InfeasibleError(HomoLumoError):
    """No bridge satisfies the constraints."""


class BudgetExceededError(HomoLumoError):
    """Exhaustive enumeration would exceed the configured bit budget."""


class SolverError(HomoLumoError):
    """The SDP solver did not reach an optimal status."""

    def __init__(self, message: str, status: str | None = None):
        self.status = status
        super().__init__(message)


class InternalFaultError(HomoLumoError, AssertionError):
    """Two independent computations that must agree did not."""
