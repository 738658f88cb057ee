"""Exception types raised across the library."""

from __future__ import annotations


class QufitError(Exception):
    """Base class for library errors."""


class ChartDomainError(QufitError, ValueError):
    """Parameter point outside the open domain of its chart."""


class DimensionMismatchError(QufitError, ValueError):
    """Operands with incompatible dimensions."""


class PovmValidationError(QufitError, ValueError):
    """Operator list fails the POVM conditions (PSD elements summing to 1)."""


class SingularOutcomeError(QufitError, ValueError):
    """An outcome with vanishing probability but non-vanishing probability
    derivative: the Fisher information diverges and is reported, not clipped.
    """


class SingularFisherError(QufitError, ValueError):
    """Quantum Fisher matrix too close to singular to invert."""


class IllPosedSldError(QufitError, ValueError):
    """Logarithmic-derivative equation has no solution on the state's support."""


class AchievabilityError(QufitError, ValueError):
    """Bound-attaining measurement requested where the attainability
    condition (vanishing imaginary overlap matrix) fails."""


class NonIdentifiableError(QufitError, ValueError):
    """Estimation requested for a model whose Fisher information is singular."""


class ConvergenceError(QufitError, RuntimeError):
    """Iterative optimisation hit its budget; carries the best point found."""

    def __init__(self, message: str, best=None, best_value: float | None = None):
        super().__init__(message)
        self.best = best
        self.best_value = best_value
