"""Exception hierarchy.

Exit-code mapping used by the CLI: ValidationError and subclasses -> 2,
numerical failures (resonance, divergence, inversion, ...) -> 3,
BudgetExceededError -> 4.
"""

from __future__ import annotations


class RotkitError(Exception):
    """Base class for all package errors."""


class ValidationError(RotkitError):
    """Bad user input or violated precondition."""


class ConfigurationError(ValidationError):
    """Structurally invalid configuration (grid sizes, schedules, budgets)."""


class DegenerateInputError(ValidationError):
    """Input carries no usable information (e.g. all-zero coefficients)."""


class NonInvertibleError(ValidationError):
    """Requested map would not be a homeomorphism."""


class UnsupportedDriverError(ValidationError):
    """Operation requires a driver-independent map."""


class RangeError(ValidationError):
    """Requested target is outside the achievable range."""


class EvaluationError(RotkitError):
    """A user-supplied rule produced a non-finite or inconsistent value."""


class ResonanceError(RotkitError):
    """An exact (or machine-exact) small-divisor resonance was hit."""

    def __init__(self, k, message: str | None = None):
        self.k = tuple(int(v) for v in k)
        super().__init__(message or f"resonant mode k={self.k}")


class UnsolvableError(RotkitError):
    """Difference equation has no solution (nonzero mean forcing)."""


class InversionError(RotkitError):
    """Near-identity inversion precondition failed (derivative too large)."""


class IterationError(RotkitError):
    """Fixed-point sweep failed to converge within the sweep budget."""


class DivergenceError(RotkitError):
    """Conjugation loop residuals stopped contracting.

    Carries the stage index and the residual trace observed so far.
    """

    def __init__(self, stage: int, residuals, message: str | None = None):
        self.stage = int(stage)
        self.residuals = list(residuals)
        super().__init__(
            message
            or f"residual increased at stage {self.stage}: trace={self.residuals}"
        )


class BudgetExceededError(RotkitError):
    """Work budget exhausted; carries the largest completed cutoff."""

    def __init__(self, message: str, completed_K: int | None = None, partial=None):
        self.completed_K = completed_K
        self.partial = partial
        super().__init__(message)


class CatalogLookupError(RotkitError, LookupError):
    """Unknown index into a built-in catalog."""
