"""Exception and warning types raised by gswap."""


class GSwapError(Exception):
    """Base class for all gswap errors."""


class InvalidInputError(GSwapError, ValueError):
    """Malformed input: wrong shape, out-of-range index, non-symplectic matrix."""


class NumericalDomainError(GSwapError, ArithmeticError):
    """A quantity left its mathematical domain beyond roundoff tolerance."""


class ReductionError(GSwapError):
    """Normal-form reduction did not reproduce its input.

    The largest entrywise residual is kept on ``residual``.
    """

    def __init__(self, message: str, residual: float = float("nan")) -> None:
        super().__init__(message)
        self.residual = residual


class DegenerateMeasurementError(GSwapError):
    """The measured modes carry no noise, so the conditioning is undefined."""


class EmptyStateError(GSwapError):
    """A measurement would leave no unmeasured modes."""


class StructureError(GSwapError):
    """A three-mode optomechanical CM lost its expected block structure."""


class ModelInconsistencyError(GSwapError):
    """A reduced two-mode state violates the uncertainty principle."""


class NotEntangledError(GSwapError, ValueError):
    """A lifetime was requested for a state that carries no entanglement."""


class NumericalClampWarning(RuntimeWarning):
    """A slightly negative radicand was clamped to zero."""


class PureLimitWarning(RuntimeWarning):
    """A zero symplectic eigenvalue was met (infinite log-negativity)."""


class AsymmetricChannelWarning(RuntimeWarning):
    """A two-mode state expected to be symmetric has unequal local blocks."""
