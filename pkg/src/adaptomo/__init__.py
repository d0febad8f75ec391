"""Adaptive quantum state tomography: estimators, adaptive strategies and a simulation harness."""

__version__ = "0.1.0"

from .errors import (
    ConfigurationError,
    ConvergenceError,
    DegeneratePosteriorError,
    DimensionError,
    DomainError,
    IncompletenessError,
    SingularityError,
    StateError,
    TomographyError,
)
from .measurement import MeasurementRecord, Povm
from .priors import PriorSpec
