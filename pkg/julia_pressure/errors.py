"""
Exception hierarchy for julia-pressure.

ConfigError maps to CLI exit code 2, every NumericError to exit code 3.
"""

from typing import Any, Optional


class JuliaPressureError(Exception):
    """Base class for all julia-pressure errors."""


class ConfigError(JuliaPressureError):
    """Invalid map specification, grid, or run configuration."""


class NumericError(JuliaPressureError):
    """A numerical procedure failed or its precondition does not hold."""


class NonConvergence(NumericError):
    """Root finding or polishing did not reach the residual tolerance."""

    def __init__(self, message: str, worst_residual: float = float("nan")):
        super().__init__(f"{message} (worst residual {worst_residual:.3e})")
        self.worst_residual = worst_residual


class BudgetExceeded(NumericError):
    """A backward tree would exceed the leaf budget."""

    def __init__(self, requested: int, budget: int):
        super().__init__(f"tree needs {requested} leaves, budget is {budget}")
        self.requested = requested
        self.budget = budget


class UnsafeBasepoint(NumericError):
    """The tree root lies too close to the critical forward orbit."""

    def __init__(self, message: str, report: Optional[Any] = None):
        super().__init__(message)
        self.report = report


class EmptyTree(NumericError):
    """Every leaf of a backward tree was excluded."""


class EmptySample(NumericError):
    """No sampled point survived the region filter."""


class OrbitHitsCritical(NumericError):
    """A forward orbit came within tolerance of a critical point."""

    def __init__(self, step: int):
        super().__init__(f"orbit hits a critical point at step {step}")
        self.step = step


class NotAnExceptionalPreimage(NumericError):
    """The point is not in f^-1(Σ) minus Σ."""


class MapNotExceptional(NumericError):
    """The operation needs a nonempty exceptional set."""


class SlopeNotStabilized(NumericError):
    """Pressure slopes at the grid ends have not settled."""

    def __init__(self, side: str, slope_change: float):
        super().__init__(f"slope at the {side} grid end changes by {slope_change:.4f}")
        self.side = side
        self.slope_change = slope_change


class GridTooCoarse(NumericError):
    """The phase transition cannot be bracketed unambiguously."""


class PressureGapTooSmall(NumericError):
    """The Poincaré exponent p is too close to the hidden pressure."""

    def __init__(self, gap: float):
        super().__init__(f"p exceeds the hidden pressure by only {gap:.4f}")
        self.gap = gap


class NotSpecial(NumericError):
    """f is not injective on the test region."""


class RegionTouchesExcluded(NumericError):
    """The test region meets W, f^-1(W), or a critical point."""


class SeedDiverged(NumericError):
    """Newton iteration from every seed failed."""
