"""Count data and the linear-inversion estimator."""

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionError, DomainError, IncompletenessError
from ..states import PSD_TOL, density_from_coords, n_coords


@dataclass(frozen=True)
class CountVector:
    """Per-outcome counts collected with one measurement.

    ``measurement`` indexes into the list of POVMs that accompanies the data.
    Counts are normally integers; non-integer expected counts are accepted so
    that exact probabilities can be fed in directly.
    """

    measurement: int
    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=float)
        if counts.ndim != 1:
            raise DomainError("counts must be a 1-D vector")
        if np.any(counts < 0):
            raise DomainError("counts must be nonnegative")
        object.__setattr__(self, "counts", counts)

    @property
    def total(self):
        return float(self.counts.sum())


def tally(records, measurements=None):
    """Group ``(povm, outcome)`` pairs into count vectors.

    POVMs are identified by object identity. Returns ``(counts, measurements)``.
    """
    measurements = list(measurements) if measurements is not None else []
    index = {id(m): i for i, m in enumerate(measurements)}
    acc = {}
    for povm, outcome in records:
        key = id(povm)
        if key not in index:
            index[key] = len(measurements)
            measurements.append(povm)
        i = index[key]
        if i not in acc:
            acc[i] = np.zeros(povm.n_outcomes)
        acc[i][outcome] += 1
    counts = [CountVector(i, c) for i, c in sorted(acc.items())]
    return counts, measurements


def _design(counts, measurements):
    rows, targets = [], []
    for cv in counts:
        povm = measurements[cv.measurement]
        if len(cv.counts) != povm.n_outcomes:
            raise DimensionError(
                f"measurement {cv.measurement} has {povm.n_outcomes} outcomes, "
                f"got {len(cv.counts)} counts"
            )
        if cv.total <= 0:
            continue
        rows.append(povm.rows)
        targets.append(cv.counts / cv.total)
    if not rows:
        raise IncompletenessError("no data")
    return np.vstack(rows), np.concatenate(targets)


def linear_inversion(counts, measurements):
    """Least-squares solution of ``n_i = Tr(M_i rho)`` over unit-trace Hermitian rho.

    Returns
    -------
    rho : ndarray
        The (possibly non-positive) estimate; no projection is applied.
    physical : bool
        Whether ``rho`` is positive semidefinite within tolerance.

    Raises
    ------
    IncompletenessError
        If the effects with data do not span the traceless Hermitian matrices.
    """
    dims = {m.dim for m in measurements}
    if len(dims) != 1:
        raise DimensionError("measurements act on different dimensions")
    dim = dims.pop()
    rows, freqs = _design(counts, measurements)
    a = rows[:, 1:]
    b = freqs - rows[:, 0]
    if np.linalg.matrix_rank(a) < n_coords(dim):
        raise IncompletenessError(
            f"design matrix has rank {np.linalg.matrix_rank(a)} < {n_coords(dim)}"
        )
    x, *_ = np.linalg.lstsq(a, b, rcond=None)
    rho = density_from_coords(x, dim)
    physical = bool(np.linalg.eigvalsh(rho)[0] >= -PSD_TOL)
    return rho, physical


def stokes_estimate(counts_xyz):
    """Stokes parameters ``(n+ - n-) / (n+ + n-)`` from per-axis count pairs."""
    c = np.asarray(counts_xyz, dtype=float)
    return (c[:, 0] - c[:, 1]) / c.sum(axis=1)
