"""
Exception hierarchy for the travelwave toolkit.

Every exception carries the exit code the CLI returns for it:
1 for usage/config problems, 2 for violated mathematical preconditions,
3 for numerical failures.
"""

from typing import List, Optional


class TravelWaveError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 1


# ============================================================================
# CONFIGURATION (exit 1)
# ============================================================================

class ConfigError(TravelWaveError):
    """Malformed or inconsistent configuration."""

    exit_code = 1


class UsageError(ConfigError):
    """Bad command-line usage."""


class KernelError(ConfigError):
    """Kernel specification that cannot be turned into a valid kernel."""


# ============================================================================
# MATHEMATICAL PRECONDITIONS (exit 2)
# ============================================================================

class MathematicalError(TravelWaveError):
    """An operation was called outside its mathematical domain."""

    exit_code = 2


class DomainError(MathematicalError):
    """Reaction term evaluated where it is undefined (nonpositive prey)."""


class PreconditionError(MathematicalError):
    """Generic violated precondition."""


class InadmissibleParamsError(MathematicalError):
    """Parameters fail the strong-Allee admissibility bound."""

    def __init__(self, message: str, record=None):
        super().__init__(message)
        self.record = record


class NoRootsError(MathematicalError):
    """Requested speed is below the minimal wave speed."""


class AssumptionViolation(MathematicalError):
    """A quantity that admissibility keeps positive went negative."""


class DivergentMomentError(MathematicalError):
    """Exponential moment requested at or beyond the decay abscissa."""


class UnsupportedKernelError(MathematicalError):
    """Kernel cannot be used for the requested operation."""


class TimeStepError(MathematicalError):
    """Time step above the positivity bound."""

    def __init__(self, message: str, bound: float):
        super().__init__(message)
        self.bound = bound


# ============================================================================
# NUMERICAL FAILURES (exit 3)
# ============================================================================

class NumericalFailure(TravelWaveError):
    """A numerical procedure did not deliver its result."""

    exit_code = 3


class UnboundedMinimizerError(NumericalFailure):
    """c* minimizer pushed against the search cap."""


class EtaSelectionError(NumericalFailure):
    """No admissible prey decay rate found by halving."""


class ConstructionError(NumericalFailure):
    """Upper/lower solutions could not be built."""


class NonConvergenceError(NumericalFailure):
    """Fixed-point iteration exhausted its iteration budget."""

    def __init__(self, message: str, history: Optional[List[float]] = None):
        super().__init__(message)
        self.history = list(history or [])


class DomainTooSmallError(NumericalFailure):
    """Computational domain too short for the requested run."""

    def __init__(self, message: str, suggested: Optional[float] = None):
        super().__init__(message)
        self.suggested = suggested


class BlowUpError(NumericalFailure):
    """Prey density fell below the positivity floor."""


class NormalizationError(NumericalFailure):
    """Profile could not be translated to the requested level."""


class WindowError(NumericalFailure):
    """Fit window outside the tail region."""


class InsufficientHistoryError(NumericalFailure):
    """Too few samples for a speed fit."""


class ConsistencyError(NumericalFailure):
    """Internal invariant violated during an iteration."""
