"""Exception types shared across the toolkit."""


class WormkitError(Exception):
    """Base class for all toolkit errors."""


class DomainError(WormkitError, ValueError):
    """A point or parameter lies outside the set where an operation is defined."""


class SingularityError(DomainError):
    """An operation was asked to evaluate at a coordinate singularity."""


class ConfigurationError(WormkitError, ValueError):
    """Invalid configuration (tolerances, sampling sizes, missing profile)."""


class AccuracyError(WormkitError, ArithmeticError):
    """A numerical procedure could not reach its target accuracy.

    The best available estimate is attached so callers can decide whether
    to use it anyway.
    """

    def __init__(self, message, best_estimate=None, err_estimate=None):
        super().__init__(message)
        self.best_estimate = best_estimate
        self.err_estimate = err_estimate
