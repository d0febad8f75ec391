"""CSV and JSON persistence of ensemble results."""

import csv
import json

import numpy as np

from ..errors import DomainError
from .analysis import bound_curves, fit_scaling

CSV_COLUMNS = ("replica", "N", "infidelity", "bures_sq", "trace_dist", "hs_dist", "posterior_size", "seconds")


def _fmt(v):
    # repr-exact floats keep files byte-reproducible; NaN is left blank
    return "" if not np.isfinite(v) else repr(float(v))


def write_trials_csv(path, trials):
    """One row per (replica, checkpoint) with the columns of :data:`CSV_COLUMNS`."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for t in trials:
            for i, n in enumerate(t.n):
                w.writerow(
                    [t.replica, int(n)]
                    + [
                        _fmt(getattr(t, c)[i])
                        for c in ("infidelity", "bures_sq", "trace_dist", "hs_dist", "posterior_size", "seconds")
                    ]
                )


def read_curve_csv(path, metric="infidelity"):
    """Mean of ``metric`` per ``N`` from a trials CSV, as ``(N, values)`` arrays."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise DomainError(f"cannot read {path}: {exc}") from None
    if not rows or "N" not in rows[0] or metric not in rows[0]:
        raise DomainError(f"{path}: expected columns 'N' and {metric!r}")
    acc = {}
    for lineno, row in enumerate(rows, start=2):
        try:
            acc.setdefault(int(row["N"]), []).append(float(row[metric]))
        except (TypeError, ValueError):
            raise DomainError(f"{path}:{lineno}: malformed N or {metric} value") from None
    n = np.array(sorted(acc))
    return n, np.array([np.mean(acc[k]) for k in n])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    if isinstance(obj, np.generic):
        return _jsonable(obj.item())
    return obj


def summary_dict(cfg, result, window=None):
    """Config echo, per-checkpoint statistics, power-law fits and bound ratios."""
    fits = {}
    for metric in ("infidelity", "bures_sq"):
        for stat in ("mean", "median"):
            try:
                fits[f"{metric}_{stat}"] = fit_scaling(result.n, result.stats[metric][stat], window).to_dict()
            except DomainError as exc:
                fits[f"{metric}_{stat}"] = {"error": str(exc)}
    bounds = bound_curves(cfg.dim, result.n)
    comparison = {name: (result.mean / curve).tolist() for name, curve in bounds.items()}
    return _jsonable(
        {
            "config": cfg.to_dict(),
            "checkpoints": result.n.tolist(),
            "stats": result.stats,
            "fits": fits,
            "bounds": {name: curve.tolist() for name, curve in bounds.items()},
            "mean_over_bound": comparison,
        }
    )


def write_summary_json(path, cfg, result, window=None):
    with open(path, "w") as fh:
        json.dump(summary_dict(cfg, result, window), fh, indent=2, sort_keys=True)
        fh.write("\n")
