"""Self-guided tomography: stochastic gradient descent on the infidelity."""

from dataclasses import dataclass

import numpy as np

from ..errors import DomainError, StateError
from ..states import check_dim

MAX_RETRIES = 10


def fix_gauge(psi):
    """Normalize ``psi`` and make its first nonzero amplitude real positive."""
    psi = np.asarray(psi, dtype=complex)
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise DomainError("zero vector")
    psi = psi / norm
    lead = psi[np.flatnonzero(np.abs(psi) > 1e-14)[0]]
    return psi * (abs(lead) / lead)


@dataclass(frozen=True)
class SelfGuidedState:
    """Current pure-state estimate and the number of completed iterations."""

    psi: np.ndarray
    n: int = 0

    def __post_init__(self):
        psi = np.asarray(self.psi, dtype=complex)
        check_dim(psi.shape[0])
        if abs(np.linalg.norm(psi) - 1.0) > 1e-10:
            raise DomainError("self-guided estimate must be normalized")
        object.__setattr__(self, "psi", psi)


def gains(n):
    """Perturbation size and step size at iteration ``n``: ``(n^-1/3, 1/n)``."""
    return n ** (-1.0 / 3.0), 1.0 / n


def shot_oracle(truth):
    """Failure-fraction oracle for projections of the pure state ``truth``."""
    truth = np.asarray(truth, dtype=complex)

    def oracle(probe, shots, rng):
        fail = 1.0 - abs(np.vdot(probe, truth)) ** 2
        return rng.binomial(shots, min(max(fail, 0.0), 1.0)) / shots

    return oracle


def exact_oracle(truth):
    """Noise-free oracle returning the exact failure probability."""
    truth = np.asarray(truth, dtype=complex)

    def oracle(probe, shots, rng):
        return 1.0 - abs(np.vdot(probe, truth)) ** 2

    return oracle


def self_guided_step(state, shots_per_eval, outcome_oracle, rng):
    """One simultaneous-perturbation step.

    Draws ``Delta`` with independent signs on the real and imaginary part of
    every amplitude, evaluates the failure fractions of both renormalized
    probes ``psi +/- eps Delta`` and moves against the resulting gradient
    estimate.

    Parameters
    ----------
    outcome_oracle : callable
        ``oracle(probe, shots, rng)`` returning the observed fraction of
        failed projections onto ``probe``.
    """
    if shots_per_eval < 1:
        raise DomainError("shots_per_eval must be positive")
    d = state.psi.shape[0]
    n = state.n + 1
    eps, alpha = gains(n)
    psi = state.psi
    for _ in range(MAX_RETRIES):
        signs = rng.choice((-1.0, 1.0), size=2 * d)
        delta = signs[:d] + 1j * signs[d:]
        plus = psi + eps * delta
        minus = psi - eps * delta
        if np.linalg.norm(plus) == 0 or np.linalg.norm(minus) == 0:
            continue
        f_plus = outcome_oracle(plus / np.linalg.norm(plus), shots_per_eval, rng)
        f_minus = outcome_oracle(minus / np.linalg.norm(minus), shots_per_eval, rng)
        grad = (f_plus - f_minus) / (2 * eps) * delta
        new = psi - alpha * grad
        if np.linalg.norm(new) > 1e-12:
            return SelfGuidedState(fix_gauge(new), n)
    raise StateError("self-guided update vanished repeatedly")
