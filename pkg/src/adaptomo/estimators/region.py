"""Approximate credible regions from a particle set."""

from dataclasses import dataclass

import numpy as np

from ..errors import DomainError

KHACHIYAN_TOL = 1e-4


@dataclass(frozen=True)
class CredibleEllipsoid:
    """Ellipsoid ``{x : (x - c)^T shape^+ (x - c) <= 1}`` in Bloch coordinates.

    ``shape`` is the PSD matrix whose eigenvectors are the axes and whose
    eigenvalues are the squared semi-axis lengths. A rank-deficient shape
    means the region is flat (``degenerate`` is then set); a zero shape is a
    single point.
    """

    center: np.ndarray
    shape: np.ndarray
    mass: float
    degenerate: bool = False

    def membership(self, x):
        """``(x - c)^T shape^+ (x - c)``; ``inf`` off the ellipsoid's affine hull."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        diff = x - self.center
        evals, evecs = np.linalg.eigh(self.shape)
        keep = evals > 1e-14 * max(evals.max(), 1e-300)
        proj = diff @ evecs
        inside = np.sum(proj[:, keep] ** 2 / evals[keep], axis=1)
        off = np.sum(proj[:, ~keep] ** 2, axis=1)
        return np.where(off > 1e-18, np.inf, inside)

    def contains(self, x, tol=1e-3):
        return self.membership(x) <= 1 + tol

    def volume(self):
        """Volume up to the unit-ball constant, ``sqrt(det shape)``."""
        return float(np.sqrt(max(np.linalg.det(self.shape), 0.0)))


def khachiyan_mvee(points, tol=KHACHIYAN_TOL, max_iter=100000):
    """Minimum-volume enclosing ellipsoid of full-dimensional ``points``.

    Returns ``(center, A)`` with the ellipsoid ``(x - c)^T A (x - c) <= 1``.
    ``A`` is rescaled at the end so every input point is enclosed exactly.
    """
    p = np.asarray(points, dtype=float)
    n, d = p.shape
    q = np.vstack([p.T, np.ones(n)])
    u = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        x = (q * u) @ q.T
        m = np.einsum("ij,ji->i", q.T, np.linalg.solve(x, q))
        j = int(np.argmax(m))
        step = (m[j] - d - 1) / ((d + 1) * (m[j] - 1))
        new_u = (1 - step) * u
        new_u[j] += step
        err = np.linalg.norm(new_u - u)
        u = new_u
        if err < tol:
            break
    center = p.T @ u
    cov = (p.T * u) @ p - np.outer(center, center)
    a = np.linalg.inv(cov) / d
    diff = p - center
    worst = np.max(np.einsum("ij,jk,ik->i", diff, a, diff))
    if worst > 1:
        a = a / worst
    return center, a


def credible_region(ps, alpha):
    """Enclosing ellipsoid of the heaviest particles holding mass ``>= 1 - alpha``.

    Particles are sorted by weight and accepted until their weights sum to at
    least ``1 - alpha``; the minimum-volume ellipsoid of the accepted points
    (in their affine hull, when they do not span all coordinates) is
    returned. Fewer points than ``dim + 1`` flags the result as degenerate.
    """
    if not 0 < alpha < 1:
        raise DomainError("alpha must lie in (0, 1)")
    order = np.argsort(-ps.weights, kind="stable")
    cum = np.cumsum(ps.weights[order])
    k = int(np.searchsorted(cum, 1 - alpha - 1e-12)) + 1
    k = min(k, ps.n)
    chosen = ps.coords[order[:k]]
    mass = float(cum[k - 1])
    m = chosen.shape[1]

    center = chosen.mean(axis=0)
    centered = chosen - center
    if k > 1:
        _, sv, vt = np.linalg.svd(centered, full_matrices=False)
        rank = int(np.sum(sv > 1e-10 * max(sv[0], 1e-300)))
    else:
        rank = 0
    if rank == 0:
        return CredibleEllipsoid(center, np.zeros((m, m)), mass, degenerate=True)
    basis = vt[:rank]
    reduced = centered @ basis.T
    if k < rank + 1:
        rank = k - 1
        basis = basis[:rank]
        reduced = reduced[:, :rank]
    if rank == 1:
        lo, hi = reduced.min(), reduced.max()
        c_red = np.array([(lo + hi) / 2])
        shape_red = np.array([[((hi - lo) / 2) ** 2]])
    else:
        c_red, a_red = khachiyan_mvee(reduced)
        shape_red = np.linalg.inv(a_red)
    full_center = center + c_red @ basis
    full_shape = basis.T @ shape_red @ basis
    degenerate = rank < m or k < m + 1
    return CredibleEllipsoid(full_center, (full_shape + full_shape.T) / 2, mass, degenerate)
