"""Exception hierarchy shared by the library, the CLI and the service.

Precondition failures map to CLI exit code 2 (HTTP 422), numerical failures
to exit code 3 (HTTP 500).
"""

from __future__ import annotations

from typing import Optional, Sequence


class SpikelabError(Exception):
    """Base class for every error raised by spikelab."""


class PreconditionError(SpikelabError, ValueError):
    """Input violates an operation's precondition."""


class ExpressionSyntaxError(PreconditionError):
    def __init__(self, message: str, position: int, source: str) -> None:
        self.position = position
        self.source = source
        super().__init__(f"{message} at offset {position} in {source!r}")


class SubcriticalityError(PreconditionError):
    pass


class UndefinedExpressionError(PreconditionError):
    """J, V or φ is undefined, infinite or complex where the problem needs it."""

    def __init__(self, message: str, point: Optional[Sequence[float]] = None) -> None:
        self.point = None if point is None else [float(c) for c in point]
        where = "" if self.point is None else f" at x={self.point}"
        super().__init__(message + where)


class AssumptionError(PreconditionError):
    pass


class BoundaryConstancyError(PreconditionError):
    def __init__(self, field: str, variation: float, threshold: float) -> None:
        self.field = field
        self.variation = variation
        super().__init__(
            f"{field} is not constant on the boundary (relative variation "
            f"{variation:.3e} >= {threshold:.1e}); Σ̄ is only defined when "
            f"J and V are boundary-constant"
        )


class DispatchError(PreconditionError):
    pass


class NumericalError(SpikelabError, ArithmeticError):
    """A numerical procedure failed to deliver the requested accuracy."""


class ShootingError(NumericalError):
    def __init__(
        self,
        message: str,
        radius: Optional[float] = None,
        state: Optional[Sequence[float]] = None,
    ) -> None:
        self.radius = radius
        self.state = None if state is None else [float(s) for s in state]
        detail = ""
        if radius is not None:
            detail = f" (last r={radius:.6g}, state={self.state})"
        super().__init__(message + detail)


class BracketError(NumericalError):
    pass


class ProjectionError(NumericalError):
    pass


class ExpressionDomainError(NumericalError):
    def __init__(self, message: str, point: Optional[Sequence[float]]) -> None:
        self.point = None if point is None else [float(c) for c in point]
        super().__init__(f"{message} at x={self.point}")


class QuadratureError(NumericalError):
    pass


class ResidualError(NumericalError):
    """A solved object misses its own identity check."""

    def __init__(self, identity: str, residual: float, target: float) -> None:
        self.identity = identity
        self.residual = residual
        self.target = target
        super().__init__(
            f"{identity} residual {residual:.3e} exceeds {target:.1e} after refinement"
        )
