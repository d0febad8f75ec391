"""Multinomial likelihood and (hedged) maximum-likelihood estimation."""

import numpy as np
from scipy.optimize import minimize

from ..errors import ConvergenceError, DimensionError

DEFAULT_HEDGING = 0.5


def _flatten(counts, measurements):
    effects, weights = [], []
    for cv in counts:
        povm = measurements[cv.measurement]
        if len(cv.counts) != povm.n_outcomes:
            raise DimensionError("count vector length does not match the POVM")
        for e, n in zip(povm.effects, cv.counts):
            if n > 0:
                effects.append(e)
                weights.append(n)
    return np.array(effects), np.array(weights, dtype=float)


def _loglik(rho, effects, weights):
    p = np.real(np.einsum("kij,ji->k", effects, rho))
    if np.any(p <= 0):
        return -np.inf, p
    return float(weights @ np.log(p)), p


def log_likelihood(rho, counts, measurements):
    """``sum_i N_i log Tr(M_i rho)``; ``-inf`` if an observed outcome is impossible."""
    effects, weights = _flatten(counts, measurements)
    if len(weights) == 0:
        return 0.0
    return _loglik(np.asarray(rho, dtype=complex), effects, weights)[0]


def _objective(rho, effects, weights, beta):
    ll, p = _loglik(rho, effects, weights)
    if beta:
        evals = np.linalg.eigvalsh(rho)
        if evals[0] <= 0:
            return -np.inf, p
        ll += beta * float(np.sum(np.log(evals)))
    return ll, p


def _value_and_grad(params, effects, weights, beta, dim):
    # params are Re T and Im T stacked; rho = T^dag T / Tr(T^dag T)
    half = dim * dim
    t = (params[:half] + 1j * params[half:]).reshape(dim, dim)
    gram = t.conj().T @ t
    norm = np.real(np.trace(gram))
    rho = gram / norm
    p = np.real(np.einsum("kij,ji->k", effects, rho))
    if np.any(p <= 0):
        return np.inf, np.zeros_like(params)
    value = float(weights @ np.log(p))
    g = np.einsum("k,kij->ij", weights / p, effects)
    if beta:
        evals = np.linalg.eigvalsh(rho)
        if evals[0] <= 0:
            return np.inf, np.zeros_like(params)
        value += beta * float(np.sum(np.log(evals)))
        g = g + beta * np.linalg.inv(rho)
    # derivative with respect to conj(T) of the normalized objective
    dt = t @ (g - np.real(np.trace(rho @ g)) * np.eye(dim)) / norm
    grad = 2 * np.concatenate([dt.real.ravel(), dt.imag.ravel()])
    return -value, -grad


def mle_estimate(counts, measurements, hedging_beta=None, *, tol=1e-12, max_iter=5000):
    """Maximum-likelihood state, optionally hedged by ``(det rho)^beta``.

    The state is parametrized as ``rho = T^dag T / Tr(T^dag T)`` with an
    unconstrained complex ``T``, which keeps every iterate physical, and the
    objective is maximized with L-BFGS starting from the maximally mixed
    state. Rank-deficient optima are approached as ``T`` becomes singular.

    Parameters
    ----------
    hedging_beta : float, optional
        Exponent of the hedging factor. ``None`` or 0 gives the plain MLE.
    tol : float
        Relative objective tolerance passed to the optimizer.

    Raises
    ------
    ConvergenceError
        When the optimizer stops without meeting its tolerances within
        ``max_iter`` iterations; the best iterate is attached as ``best``.
    """
    effects, weights = _flatten(counts, measurements)
    dim = effects.shape[1]
    beta = float(hedging_beta or 0.0)
    start = np.concatenate([np.eye(dim).ravel(), np.zeros(dim * dim)])
    res = minimize(
        _value_and_grad,
        start,
        args=(effects, weights, beta, dim),
        jac=True,
        method="L-BFGS-B",
        options={"maxiter": max_iter, "ftol": tol, "gtol": 1e-9 * max(weights.sum(), 1.0), "maxcor": 20},
    )
    half = dim * dim
    t = (res.x[:half] + 1j * res.x[half:]).reshape(dim, dim)
    rho = t.conj().T @ t
    rho = rho / np.real(np.trace(rho))
    rho = (rho + rho.conj().T) / 2
    if not res.success and res.nit >= max_iter:
        raise ConvergenceError(f"MLE did not converge in {max_iter} iterations", best=rho)
    return rho
