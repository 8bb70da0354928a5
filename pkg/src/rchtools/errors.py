"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class RCHError(Exception):
    """Base class for every error raised by rchtools."""


class NotSkew(RCHError, ValueError):
    pass


class Degenerate(RCHError, ValueError):
    pass


class NotARotation(RCHError, ValueError):
    pass


class SingularInertia(RCHError, ValueError):
    pass


class VariantMismatch(RCHError, ValueError):
    pass


class ControlOutsideW(RCHError, ValueError):
    """Control vector has components outside the admissible channels."""


class DegenerateGain(RCHError, ValueError):
    pass


class DimensionMismatch(RCHError, ValueError):
    pass


class NonFinite(RCHError, ArithmeticError):
    """Integration produced a non-finite value."""

    def __init__(self, step: int, message: str | None = None):
        self.step = step
        super().__init__(message or f"non-finite state at step {step}")


class EmptyTrajectory(RCHError, ValueError):
    pass


class MissingDiagnostic(RCHError, KeyError):
    pass


class ParseError(RCHError, ValueError):
    """Malformed scenario document."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")


class ValidationError(RCHError, ValueError):
    """Scenario is well formed but violates a field constraint."""

    def __init__(self, field: str, message: str):
        self.field = field
        self.message = message
        super().__init__(message if message.startswith(field) else f"{field}: {message}")
