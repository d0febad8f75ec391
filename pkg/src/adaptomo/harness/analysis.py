"""Power-law fits and reference bound curves."""

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionError, DomainError

MIN_FIT_POINTS = 4
GILL_MASSAR = {2: 9.0 / 4.0, 4: 75.0 / 4.0}
COLLECTIVE_MIXED = 3.0 / 4.0 + 4.0 / (3.0 * np.pi)


@dataclass(frozen=True)
class ScalingFit:
    """``value ~ prefactor * N**exponent`` fitted on ``window``.

    ``residual`` is the RMS deviation in natural-log units and ``stderr`` the
    standard error of the exponent from the regression.
    """

    exponent: float
    prefactor: float
    window: tuple
    residual: float
    stderr: float
    n_points: int

    def to_dict(self):
        return {
            "exponent": self.exponent,
            "prefactor": self.prefactor,
            "window": list(self.window),
            "residual": self.residual,
            "stderr": self.stderr,
            "n_points": self.n_points,
        }


def default_window(n):
    """The last decade of the shot axis."""
    hi = float(np.max(n))
    return (hi / 10.0, hi)


def fit_scaling(n, values, window=None):
    """Least-squares line through ``(log N, log value)`` on ``window``.

    Parameters
    ----------
    n, values : array_like
        The curve.
    window : (float, float), optional
        Inclusive range of ``N``; the last decade by default.

    Raises
    ------
    DomainError
        Fewer than four points in the window, or a nonpositive value there.
    """
    n = np.asarray(n, dtype=float)
    values = np.asarray(values, dtype=float)
    if n.shape != values.shape:
        raise DomainError("N and values must have the same length")
    lo, hi = default_window(n) if window is None else (float(window[0]), float(window[1]))
    if not lo < hi:
        raise DomainError("fit window must have lo < hi")
    sel = (n >= lo * (1 - 1e-12)) & (n <= hi * (1 + 1e-12))
    k = int(sel.sum())
    if k < MIN_FIT_POINTS:
        raise DomainError(f"fit window [{lo:g}, {hi:g}] holds {k} points; need {MIN_FIT_POINTS}")
    if np.any(values[sel] <= 0) or not np.all(np.isfinite(values[sel])):
        raise DomainError("values in the fit window must be positive and finite")
    x, y = np.log(n[sel]), np.log(values[sel])
    design = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    dof = k - 2
    s2 = float(resid @ resid) / dof if dof > 0 else 0.0
    sxx = float(np.sum((x - x.mean()) ** 2))
    return ScalingFit(
        exponent=float(coef[0]),
        prefactor=float(np.exp(coef[1])),
        window=(lo, hi),
        residual=float(np.sqrt(np.mean(resid**2))),
        stderr=float(np.sqrt(s2 / sxx)),
        n_points=k,
    )


def bound_curves(dim, n):
    """Reference infidelity curves on the grid ``n``.

    ``massar_popescu`` (``1 / (N + 2)``) and ``collective_mixed`` are qubit
    only; ``gill_massar`` uses 9/4 for qubits and 75/4 for two qubits.
    """
    if dim not in GILL_MASSAR:
        raise DimensionError(f"bounds are tabulated for dim 2 and 4, not {dim}")
    n = np.asarray(n, dtype=float)
    if np.any(n < 0):
        raise DomainError("N must be nonnegative")
    with np.errstate(divide="ignore"):
        curves = {}
        if dim == 2:
            curves["massar_popescu"] = 1.0 / (n + 2.0)
            curves["collective_mixed"] = COLLECTIVE_MIXED / n
        curves["gill_massar"] = GILL_MASSAR[dim] / n
    return curves
