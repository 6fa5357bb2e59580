"""Exception types raised across the package."""


class DivTurboError(Exception):
    """Base class for all package errors."""


class BudgetExhausted(DivTurboError):
    """An evaluation was requested after the evaluation budget ran out."""


class OutOfDomain(DivTurboError, ValueError):
    """A query point lies outside the box domain."""


class InsufficientBudget(DivTurboError, ValueError):
    """A driver was given too few evaluations to initialise its runs."""


class SingularKernel(DivTurboError):
    """Kernel matrix could not be factorised even after jitter escalation."""


class DimensionMismatch(DivTurboError, ValueError):
    pass


class EmptyInput(DivTurboError, ValueError):
    pass


class UnsupportedDim(DivTurboError, ValueError):
    pass


class ConfigError(DivTurboError, ValueError):
    """Malformed or unknown experiment configuration entry."""
