"""Fisher information in generalized Bloch coordinates and the Cramer-Rao floor."""

import numpy as np

from ..errors import DomainError, SingularityError
from ..states import coords_from_density

INTERIOR_TOL = 1e-6


def outcome_probabilities(x, povm):
    rows = povm.rows
    return rows[:, 0] + rows[:, 1:] @ x


def probability_gradients(povm):
    """``dp_k / dx_j``; for qubits this is ``Tr(M_k sigma_j) / 2``."""
    return np.array(povm.rows[:, 1:])


def fisher_information(rho, measurements):
    """Per-shot Fisher information matrix of a measurement set.

    Shots are assumed to be spread evenly over ``measurements``, so the
    result is the average of the single-measurement matrices
    ``sum_k grad p_k grad p_k^T / p_k``.
    """
    rho = np.asarray(rho, dtype=complex)
    if np.linalg.eigvalsh(rho)[0] <= INTERIOR_TOL:
        raise DomainError("Fisher information requires an interior (full-rank) state")
    x = coords_from_density(rho)
    total = np.zeros((len(x), len(x)))
    for povm in measurements:
        p = outcome_probabilities(x, povm)
        g = probability_gradients(povm)
        total += (g.T / p) @ g
    return total / len(measurements)


def cramer_rao_floor(rho, measurements, n_shots):
    """Lower bound ``diag(I_F^-1) / N`` on the variance of each coordinate."""
    fi = fisher_information(rho, measurements)
    if np.linalg.matrix_rank(fi) < fi.shape[0]:
        raise SingularityError("Fisher information matrix is singular")
    return np.diag(np.linalg.inv(fi)) / n_shots
