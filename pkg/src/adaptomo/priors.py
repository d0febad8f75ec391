"""Random states: priors over the state space and true-state ensembles."""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .states import check_dim, coords_from_density

PRIOR_KINDS = ("bures_uniform", "hs_uniform", "haar_pure")


@dataclass(frozen=True)
class PriorSpec:
    kind: str = "bures_uniform"
    dim: int = 2

    def __post_init__(self):
        if self.kind not in PRIOR_KINDS:
            raise DomainError(f"unknown prior kind {self.kind!r}; expected one of {PRIOR_KINDS}")
        check_dim(self.dim)


def ginibre(dim, rng, size=None):
    """Square matrices with i.i.d. standard complex Gaussian entries."""
    shape = (dim, dim) if size is None else (size, dim, dim)
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def haar_unitary(dim, rng, size=None):
    """Haar-random unitary from the QR decomposition of a Ginibre matrix.

    The phases of the diagonal of ``R`` are moved into ``Q`` so that the
    result is distributed according to the Haar measure.
    """
    z = ginibre(dim, rng, size)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    phases = diag / np.abs(diag)
    return q * phases[..., None, :]


def haar_state(dim, rng, size=None):
    """Haar-random pure state vector(s), via a normalized complex Gaussian."""
    shape = (dim,) if size is None else (size, dim)
    v = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def _normalize_trace(m):
    tr = np.real(np.trace(m, axis1=-2, axis2=-1))
    m = m / tr[..., None, None]
    return (m + np.swapaxes(m.conj(), -1, -2)) / 2


def sample_states(spec, n, rng):
    """Draw ``n`` density matrices from the prior, shape ``(n, d, d)``."""
    d = spec.dim
    if spec.kind == "haar_pure":
        psi = haar_state(d, rng, size=n)
        return np.einsum("ni,nj->nij", psi, psi.conj())
    g = ginibre(d, rng, size=n)
    if spec.kind == "hs_uniform":
        return _normalize_trace(g @ np.swapaxes(g.conj(), -1, -2))
    u = haar_unitary(d, rng, size=n)
    a = (np.eye(d) + u) @ g
    return _normalize_trace(a @ np.swapaxes(a.conj(), -1, -2))


def sample_prior(spec, rng):
    """One density matrix drawn from the prior described by ``spec``.

    ``bures_uniform`` uses ``(1 + U) G G^dag (1 + U^dag)`` with a Ginibre
    ``G`` and Haar ``U``; ``hs_uniform`` uses ``G G^dag``; ``haar_pure``
    returns a random rank-one projector.
    """
    return sample_states(spec, 1, rng)[0]


def sample_coords(spec, n, rng):
    """Generalized Bloch coordinates of ``n`` prior samples."""
    return coords_from_density(sample_states(spec, n, rng))


def bures_radial_pdf(s):
    """Density of the Bloch-vector length under the qubit Bures prior.

    ``p_B(s) = 4 s^2 / (pi sqrt(1 - s^2))`` on ``0 <= s < 1``.
    """
    s = np.asarray(s, dtype=float)
    if np.any(s < 0) or np.any(s >= 1):
        raise DomainError("Bloch length must satisfy 0 <= s < 1")
    out = 4 * s**2 / (np.pi * np.sqrt(1 - s**2))
    return float(out) if out.ndim == 0 else out


def bures_radial_cdf(s):
    """Closed-form CDF of :func:`bures_radial_pdf` (substituting ``s = sin t``)."""
    s = np.clip(np.asarray(s, dtype=float), 0.0, 1.0)
    return 2 / np.pi * (np.arcsin(s) - s * np.sqrt(1 - s**2))


def log_prior_density(spec, x):
    """Log prior density, up to a constant, with respect to flat coordinates.

    Returns ``-inf`` outside the physical region. Not defined for
    ``haar_pure``, which lives on a measure-zero subset.
    """
    from .states import density_from_coords

    x = np.atleast_2d(np.asarray(x, dtype=float))
    d = spec.dim
    if spec.kind == "haar_pure":
        raise DomainError("haar_pure has no density in Bloch coordinates")
    if d == 2:
        r2 = np.sum(x**2, axis=1)
        lam_prod = (1 - r2) / 4
        lam = np.stack([(1 - np.sqrt(r2)) / 2, (1 + np.sqrt(r2)) / 2], axis=1)
    else:
        lam = np.linalg.eigvalsh(density_from_coords(x, d))
        lam_prod = np.prod(lam, axis=1)
    out = np.full(x.shape[0], -np.inf)
    ok = lam[:, 0] > 0
    if spec.kind == "hs_uniform":
        out[ok] = 0.0
        return out
    # Bures measure relative to the flat (Hilbert-Schmidt) one:
    # (prod lam)^(-1/2) prod_{i<j} 1 / (lam_i + lam_j)
    logd = -0.5 * np.log(np.where(ok, lam_prod, 1.0))
    i, j = np.triu_indices(lam.shape[1], k=1)
    safe = np.where(ok[:, None], lam, 1.0)
    logd -= np.sum(np.log(safe[:, i] + safe[:, j]), axis=1)
    out[ok] = logd[ok]
    return out
