"""Exception hierarchy. The CLI maps these onto exit codes."""


class SimdetectError(Exception):
    """Base class for all package errors."""


class ValidationError(SimdetectError):
    """Rejected input or parameter."""


class EmptyDomainError(ValidationError):
    """An operation was asked to sample from an empty set."""


class DegenerateSplitError(ValidationError):
    """A partition produced an empty side."""


class NumericalError(SimdetectError):
    """A numerical procedure failed."""


class ZeroVarianceError(NumericalError):
    """A statistic that needs positive variance got a constant input."""


class AlternationError(NumericalError):
    """A trend pool is missing one direction, so alternation is impossible."""


class DuplicateNoiseError(NumericalError):
    """Noise resampling could not eliminate all duplicates within the retry cap."""


class FitFailureError(NumericalError):
    """Model fitting did not converge."""

    def __init__(self, message: str, best_loglik: float | None = None):
        super().__init__(message)
        self.best_loglik = best_loglik
