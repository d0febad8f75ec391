"""Experiment description shared by the runner and the command line."""

from dataclasses import asdict, dataclass, field

import numpy as np

from ..adaptive import Strategy
from ..errors import ConfigurationError
from ..estimators.smc import RESAMPLERS
from ..priors import PriorSpec
from ..states import density_from_coords, n_coords

ESTIMATORS = ("smc_bme", "mle", "linear")
DEFAULT_CHECKPOINTS = 20
FINITE_SET_KINDS = ("static_cycle", "two_step", "two_step_guo")


def log_checkpoints(n_max, count=DEFAULT_CHECKPOINTS, start=10):
    """Up to ``count`` log-spaced integers from ``start`` to ``n_max`` inclusive."""
    if n_max < start:
        raise ConfigurationError(f"n_max={n_max} is below the first checkpoint {start}")
    grid = np.unique(np.round(np.geomspace(start, n_max, count)).astype(int))
    return tuple(int(n) for n in grid)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce an ensemble of tomography runs.

    Parameters
    ----------
    prior : PriorSpec
        Particle-filter prior, and the source of true states unless
        ``truth`` or ``true_coords`` is given.
    truth : PriorSpec, optional
        Separate distribution for the true states, e.g. pure truths under a
        prior that also covers mixed states.
    strategy : Strategy
        Measurement-selection rule.
    true_coords : tuple of float, optional
        Fixed true state in generalized Bloch coordinates; overrides drawing
        the truth from ``prior``.
    estimator : str
        ``smc_bme``, ``mle`` or ``linear``. Ignored by ``self_guided``, whose
        estimate is its own iterate.
    n_max : int
        Shots per run. For ``self_guided`` this and ``checkpoints`` count
        iterations instead.
    checkpoints : tuple of int, optional
        Where metrics are recorded; 20 log-spaced values from 10 by default.
    resampler, n_particles, liu_west_a, mh_steps
        Particle-filter settings.
    hedging : float, optional
        Hedging exponent for ``mle``.
    angle_jitter : float
        Scale of a random unitary applied to the true state before each shot,
        modelling misaligned projectors; 0 disables it.
    timing : bool
        Record wall-clock seconds at checkpoints. Off by default so that
        outputs are byte-reproducible.
    """

    prior: PriorSpec
    strategy: Strategy
    truth: PriorSpec = None
    true_coords: tuple = None
    estimator: str = "smc_bme"
    n_max: int = 1000
    checkpoints: tuple = None
    replicas: int = 1
    seed: int = 0
    resampler: str = "liu_west"
    n_particles: int = None
    liu_west_a: float = 0.98
    mh_steps: int = 10
    hedging: float = None
    angle_jitter: float = 0.0
    timing: bool = False
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if self.strategy.dim != self.prior.dim:
            raise ConfigurationError("strategy and prior dimensions differ")
        if self.truth is not None and self.truth.dim != self.prior.dim:
            raise ConfigurationError("truth and prior dimensions differ")
        if self.estimator not in ESTIMATORS:
            raise ConfigurationError(f"unknown estimator {self.estimator!r}")
        if self.resampler not in RESAMPLERS:
            raise ConfigurationError(f"unknown resampler {self.resampler!r}")
        if self.replicas < 1:
            raise ConfigurationError("replicas must be at least 1")
        if self.n_max < 1:
            raise ConfigurationError("n_max must be positive")
        cps = self.checkpoints
        if cps is None:
            cps = log_checkpoints(self.n_max)
        cps = tuple(int(c) for c in cps)
        if not cps:
            raise ConfigurationError("no checkpoints")
        if any(b <= a for a, b in zip(cps, cps[1:])):
            raise ConfigurationError("checkpoints must be strictly increasing")
        if cps[0] < 1 or cps[-1] > self.n_max:
            raise ConfigurationError(f"checkpoints must lie in [1, {self.n_max}]")
        object.__setattr__(self, "checkpoints", cps)
        kind = self.strategy.kind
        if kind in ("two_step", "two_step_guo") and cps[0] < 10:
            raise ConfigurationError("two-step checkpoints must be at least 10")
        if self.estimator != "smc_bme" and kind not in FINITE_SET_KINDS + ("self_guided",):
            raise ConfigurationError(f"estimator {self.estimator} needs a finite measurement set")
        if self.n_particles is not None and self.n_particles < 2:
            raise ConfigurationError("n_particles must be at least 2")
        if self.angle_jitter < 0:
            raise ConfigurationError("angle_jitter must be nonnegative")
        if self.true_coords is not None:
            x = tuple(float(v) for v in self.true_coords)
            if len(x) != n_coords(self.prior.dim):
                raise ConfigurationError(
                    f"true_coords needs {n_coords(self.prior.dim)} entries, got {len(x)}"
                )
            if np.linalg.eigvalsh(density_from_coords(np.array(x), self.prior.dim))[0] < -1e-10:
                raise ConfigurationError("true_coords do not describe a physical state")
            object.__setattr__(self, "true_coords", x)
        if kind == "self_guided":
            pure = self.truth_source.kind == "haar_pure" if self.true_coords is None else (
                np.linalg.eigvalsh(density_from_coords(np.array(self.true_coords), self.prior.dim))[-1]
                > 1 - 1e-9
            )
            if not pure:
                raise ConfigurationError("self_guided needs pure true states")

    @property
    def truth_source(self):
        """Distribution the true states are drawn from."""
        return self.prior if self.truth is None else self.truth

    @property
    def dim(self):
        return self.prior.dim

    def to_dict(self):
        """Plain nested dict, suitable for JSON."""
        d = asdict(self)
        d["checkpoints"] = list(self.checkpoints)
        if self.true_coords is not None:
            d["true_coords"] = list(self.true_coords)
        return d
