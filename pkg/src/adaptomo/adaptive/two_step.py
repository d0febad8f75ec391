"""Two-step protocols: a coarse estimate followed by measurements in its eigenbasis."""

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError, DomainError, StateError
from ..measurement import axis_measurement
from ..states import bloch_from_density

TWO_STEP_VARIANTS = ("bagan", "worst_case", "guo")


def first_phase_length(n_total, variant):
    """Shots spent on the coarse estimate.

    ``bagan`` uses ``round(N^(2/3))`` (half-to-even rounding of the real
    power), ``worst_case`` uses ``N // 2``; ``guo`` follows ``bagan``.
    """
    if variant not in TWO_STEP_VARIANTS:
        raise ConfigurationError(f"unknown two-step variant {variant!r}")
    if n_total < 10:
        raise DomainError("two-step protocols need at least 10 shots")
    if variant == "worst_case":
        return n_total // 2
    return int(round(n_total ** (2.0 / 3.0)))


def rotation_to(direction):
    """Proper rotation taking ``+z`` onto the unit vector ``direction``.

    Southern directions are reached through a half turn about ``x``, which
    keeps the Rodrigues denominator ``1 + cos`` away from zero.
    """
    n = np.asarray(direction, dtype=float)
    n = n / np.linalg.norm(n)
    if n[2] < 0:
        flip = np.diag([1.0, -1.0, -1.0])
        return flip @ rotation_to(flip @ n)
    c = float(n[2])
    v = np.array([-n[1], n[0], 0.0])  # z x n
    k = np.array([[0, -v[2], v[1]], [v[2], 0, -v[0]], [-v[1], v[0], 0]])
    return np.eye(3) + k + k @ k / (1 + c)


def eigen_frame(estimate):
    """Rotation whose third column is the Bloch direction of ``estimate``.

    A maximally mixed estimate has no preferred axis and gives the identity.
    """
    s = bloch_from_density(estimate)
    r = np.linalg.norm(s)
    if r < 1e-12:
        return np.eye(3)
    return rotation_to(s / r)


def guo_probabilities(bloch_length):
    """Axis frequencies ``(p1, p2, p3)`` for the second phase."""
    root = np.sqrt(max(0.0, 1.0 - float(bloch_length) ** 2))
    denom = 2.0 + root
    return np.array([1.0 / denom, 1.0 / denom, root / denom])


@dataclass(frozen=True)
class TwoStepPlan:
    """Phase plan for one run of ``n_total`` shots.

    ``frame`` and ``axis_probs`` are only set once the first estimate is known.
    """

    n_total: int
    variant: str
    n0: int
    frame: np.ndarray = None
    axis_probs: np.ndarray = None

    def phase(self, shot):
        return 1 if shot < self.n0 else 2

    def second_phase_axes(self):
        if self.frame is None:
            raise StateError("second phase requires the first estimate")
        return [axis_measurement(self.frame[:, i], f"two-step-{'xyz'[i]}'") for i in range(3)]


def two_step_schedule(n_total, variant, first_estimate=None):
    """Build the :class:`TwoStepPlan` for ``n_total`` shots.

    Without ``first_estimate`` the plan only fixes the first-phase length;
    with it, the second-phase frame (z axis along the estimate's dominant
    eigenvector) and, for ``guo``, the axis probabilities are filled in.
    """
    n0 = first_phase_length(n_total, variant)
    if first_estimate is None:
        return TwoStepPlan(n_total, variant, n0)
    frame = eigen_frame(first_estimate)
    probs = None
    if variant == "guo":
        probs = guo_probabilities(np.linalg.norm(bloch_from_density(first_estimate)))
    return TwoStepPlan(n_total, variant, n0, frame, probs)
