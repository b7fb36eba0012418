"""
Exception hierarchy for surfdist.

Input problems (bad documents, bad expressions, bad configuration) derive from
InputError; point-wise numeric failures derive from GeometryError; failures of
a whole run derive from SolverError.
"""

from typing import Any, List, Optional, Sequence


class SurfdistError(Exception):
    """Base class for every error raised by surfdist."""


class InputError(SurfdistError, ValueError):
    """A user-supplied document, expression or setting is unusable."""


class ParseError(InputError):
    """Malformed text, with the location of the offending token."""

    def __init__(
        self,
        message: str,
        line: Optional[int] = None,
        column: Optional[int] = None,
        loc: Optional[int] = None,
    ):
        self.message = message
        self.line = line
        self.column = column
        self.loc = loc
        if line is not None:
            where = f" (line {line}, column {column})"
        elif loc is not None:
            where = f" (at offset {loc})"
        else:
            where = ""
        super().__init__(message + where)


class ValidationError(InputError):
    """Well-formed input whose values are inconsistent or out of range."""

    def __init__(self, message: str, field: Optional[str] = None):
        self.message = message
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)

    def within(self, prefix: str) -> "ValidationError":
        """Return a copy whose field path is nested under ``prefix``."""
        field = f"{prefix}.{self.field}" if self.field else prefix
        return ValidationError(self.message, field)


class CapExceeded(InputError):
    """The grid oracle would evaluate more pairs than allowed."""

    def __init__(self, pairs: int, cap: float):
        self.pairs = pairs
        self.cap = cap
        super().__init__(f"grid needs {pairs:.3e} pair evaluations, cap is {cap:.3e}")


class GeometryError(SurfdistError, ArithmeticError):
    """A numeric failure at a specific point of a surface or product state."""


class DomainViolation(GeometryError):
    """A clamped parameter lies outside its interval."""

    def __init__(self, index: int, value: float, lo: float, hi: float):
        self.index = index
        self.value = value
        self.lo = lo
        self.hi = hi
        super().__init__(
            f"parameter {index} = {value!r} outside clamped interval [{lo!r}, {hi!r}]"
        )


class EvaluationError(GeometryError):
    """An expression produced a non-finite or undefined value."""


class SingularMetric(GeometryError):
    """The induced metric failed positive-definite factorization."""

    def __init__(
        self,
        message: str = "metric is not positive definite",
        surface: Optional[int] = None,
        state: Any = None,
    ):
        self.message = message
        self.surface = surface
        self.state = state
        tag = f"surface {surface}: " if surface is not None else ""
        super().__init__(tag + message)

    def tagged(self, surface: Optional[int] = None, state: Any = None) -> "SingularMetric":
        return SingularMetric(
            self.message,
            surface=self.surface if surface is None else surface,
            state=self.state if state is None else state,
        )


class DegenerateSeparation(GeometryError):
    """The two points coincide and the potential gradient is undefined."""


class NonFiniteState(GeometryError):
    """An integration step produced NaN or infinity."""

    def __init__(self, message: str, state: Any = None):
        self.state = state
        super().__init__(message)


class SolverError(SurfdistError, RuntimeError):
    """A whole solve could not produce a usable result."""


class AllStartsFailed(SolverError):
    """No multi-start trajectory converged."""

    def __init__(self, results: Sequence[Any], failures: Sequence[BaseException] = ()):
        self.results: List[Any] = list(results)
        self.failures: List[BaseException] = list(failures)
        super().__init__(
            f"none of {len(self.results) + len(self.failures)} starts converged "
            f"({len(self.failures)} aborted)"
        )
