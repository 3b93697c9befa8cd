from typing import Optional
from typing import Sequence


class AppError(Exception):
    """Base application error."""


class ValidationError(AppError):
    """Raised when CLI arguments or configuration are invalid."""


class ScenarioError(AppError):
    """Raised when a scenario file violates the schema.

    Args:
        field: Dotted path of the offending scenario field.
        reason: Human readable reason.
    """

    def __init__(self, field: str, reason: str) -> None:
        self.field = field
        self.reason = reason
        super().__init__(f"{field}: {reason}")


class ExpressionError(AppError):
    """Raised when a field expression cannot be parsed.

    Args:
        message: Error description.
        text: Full expression source text.
        line: 1-based line of the offending token.
        column: 1-based column of the offending token.
    """

    def __init__(self, message: str, text: str, line: int, column: int) -> None:
        self.message = message
        self.text = text
        self.line = line
        self.column = column
        super().__init__(f"{message} at {line}:{column} in {text!r}")


class ExpressionEvaluationError(ExpressionError):
    """Raised when an expression leaves its domain during evaluation."""


class TensorShapeError(AppError):
    """Raised on variance, slot, or degree mismatches in tensor algebra."""


class GeometryError(AppError):
    """Raised on degenerate metrics, non-timelike velocities, or null interfaces.

    Args:
        message: Error description.
        point: Offending grid index or sample index when known.
    """

    def __init__(self, message: str, point: Optional[Sequence[int]] = None) -> None:
        self.point = tuple(int(item) for item in point) if point is not None else None
        suffix = f" at point {self.point}" if self.point is not None else ""
        super().__init__(f"{message}{suffix}")


class ModelError(AppError):
    """Raised when a constitutive model is misconfigured or misapplied."""


class GridError(AppError):
    """Raised on invalid grid resolution, axis, or band width."""
