"""Utility functions scoring candidate measurements against a particle posterior."""

import numpy as np

from ..errors import DimensionError
from ..states import density_from_coords


def _check(ps, povm):
    if povm.dim != ps.dim:
        raise DimensionError("measurement dimension does not match the particles")


def _outcome_matrix(ps, povm):
    # (n_particles, n_outcomes) table of Tr(M_k rho_s)
    rows = povm.rows
    return np.clip(rows[:, 0] + ps.coords @ rows[:, 1:].T, 0.0, 1.0)


def _entropy_bits(p, axis=-1):
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, -p * np.log2(p), 0.0)
    return terms.sum(axis=axis)


def predictive_probabilities(ps, povm):
    """Posterior predictive ``p(k) = sum_s w_s Tr(M_k rho_s)``."""
    _check(ps, povm)
    p = ps.weights @ _outcome_matrix(ps, povm)
    return p / p.sum()


def info_gain_utility(ps, povm):
    """Expected information gain in bits.

    ``H[p(k)] - sum_s w_s H[p(k | rho_s)]``, the mutual information between
    the outcome and the particle label.
    """
    _check(ps, povm)
    table = _outcome_matrix(ps, povm)
    marginal = ps.weights @ table
    return float(_entropy_bits(marginal) - ps.weights @ _entropy_bits(table))


def info_gain_brute_force(ps, povm):
    """Information gain as the expected drop in posterior entropy.

    Enumerates the outcomes, updates the weights for each one and compares
    the entropies of the particle label before and after; only meant as a
    check on small particle sets.
    """
    _check(ps, povm)
    table = _outcome_matrix(ps, povm)
    prior_h = _entropy_bits(ps.weights)
    expected = 0.0
    for k in range(table.shape[1]):
        joint = ps.weights * table[:, k]
        pk = joint.sum()
        if pk > 0:
            expected += pk * _entropy_bits(joint / pk)
    return float(prior_h - expected)


def fidelity_utility(ps, povm):
    """Expected largest eigenvalue of the post-measurement Bayesian mean."""
    _check(ps, povm)
    table = _outcome_matrix(ps, povm)
    joint = ps.weights[:, None] * table
    pk = joint.sum(axis=0)
    keep = pk > 0
    means = (joint[:, keep].T @ ps.coords) / pk[keep, None]
    lam = np.linalg.eigvalsh(density_from_coords(means, ps.dim))[:, -1]
    return float(pk[keep] @ lam)


_LOG2 = np.log(2.0)
_CLIP = 1e-16
_scratch = {}


def _buffers(shape):
    # reused work arrays; fresh multi-megabyte temporaries cost more than the
    # arithmetic itself on the per-shot path
    bufs = _scratch.get(shape)
    if bufs is None:
        _scratch.clear()
        bufs = _scratch[shape] = tuple(np.empty(shape) for _ in range(3))
    return bufs


def binary_info_gain(ps, rows):
    """:func:`info_gain_utility` for a batch of two-outcome candidates.

    ``rows`` holds the outcome-0 probability coefficients of each candidate
    (see :func:`~adaptomo.measurement.projector_rows`). Probabilities are
    clipped to ``[1e-16, 1 - 1e-16]``, which moves the result by less than
    ``1e-14`` bits.
    """
    p, q, work = _buffers((ps.n, len(rows)))
    np.matmul(ps.coords, rows[:, 1:].T, out=p)
    p += rows[:, 0]
    np.clip(p, _CLIP, 1.0 - _CLIP, out=p)
    np.subtract(1.0, p, out=q)
    np.log(p, out=work)
    work *= p
    acc = ps.weights @ work
    np.log(q, out=work)
    work *= q
    acc += ps.weights @ work
    pbar = ps.weights @ p
    marginal = pbar * np.log(pbar) + (1 - pbar) * np.log(1 - pbar)
    return (acc - marginal) / _LOG2


def binary_fidelity_utility(ps, rows):
    """:func:`fidelity_utility` for a batch of two-outcome candidates."""
    p = np.clip(rows[:, 0] + ps.coords @ rows[:, 1:].T, 0.0, 1.0)
    total = np.zeros(len(rows))
    for table in (p, 1.0 - p):
        joint = ps.weights[:, None] * table
        pk = joint.sum(axis=0)
        safe = np.where(pk > 0, pk, 1.0)
        means = (joint.T @ ps.coords) / safe[:, None]
        lam = np.linalg.eigvalsh(density_from_coords(means, ps.dim))[:, -1]
        total += np.where(pk > 0, pk * lam, 0.0)
    return total
