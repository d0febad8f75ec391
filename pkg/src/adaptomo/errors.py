"""Exception hierarchy shared across the package."""


class TomographyError(Exception):
    """Base class for all errors raised by adaptomo."""


class DimensionError(TomographyError, ValueError):
    """Operands have incompatible or unsupported Hilbert-space dimensions."""


class DomainError(TomographyError, ValueError):
    """An argument lies outside the domain of the operation."""


class IncompletenessError(TomographyError):
    """The measurement set is not tomographically complete."""


class ConvergenceError(TomographyError):
    """An iterative routine stopped before converging.

    The best iterate found so far is kept on ``best``.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class DegeneratePosteriorError(TomographyError):
    """Every particle assigned zero probability to an observed outcome."""


class SingularityError(TomographyError):
    """A matrix that must be inverted is singular."""


class ConfigurationError(TomographyError, ValueError):
    """A strategy or experiment was configured inconsistently."""


class StateError(TomographyError):
    """An operation was requested in a state that does not allow it."""
