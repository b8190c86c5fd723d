"""Exception hierarchy shared by every module."""

from __future__ import annotations


class EntropyCascadeError(Exception):
    """Base class. ``order`` is set when the failure belongs to one cascade order."""

    order: int | None = None

    def __str__(self) -> str:
        msg = super().__str__()
        if self.order is not None:
            return f"order {self.order}: {msg}"
        return msg


class InvariantViolation(EntropyCascadeError, ValueError):
    pass


class ScheduleError(EntropyCascadeError, ValueError):
    def __init__(self, message: str, order: int | None = None):
        super().__init__(message)
        self.order = order


class ScheduleNotMonotone(ScheduleError):
    pass


class IncrementExceedsCapacity(ScheduleError):
    pass


class TargetOutOfRange(EntropyCascadeError, ValueError):
    pass


class NoConvergence(EntropyCascadeError, RuntimeError):
    """Raised by a solver that ran out of iterations.

    The best vector found so far and its residual (bits) are attached.
    """

    def __init__(self, message: str, best=None, residual: float | None = None, iterations: int = 0):
        super().__init__(message)
        self.best = best
        self.residual = residual
        self.iterations = iterations


class AlphabetMismatch(EntropyCascadeError, ValueError):
    pass


class MaterializationTooLarge(EntropyCascadeError, ValueError):
    def __init__(self, required: int, cap: int):
        super().__init__(f"materialization needs {required} entries, cap is {cap}")
        self.required = required
        self.cap = cap


class IndexOutOfBounds(EntropyCascadeError, IndexError):
    pass


class AxisOutOfBounds(EntropyCascadeError, IndexError):
    pass


class ParseError(EntropyCascadeError, ValueError):
    """Malformed artifact input. ``location`` names the line/column or field."""

    def __init__(self, message: str, location: str | None = None):
        super().__init__(f"{location}: {message}" if location else message)
        self.location = location
