"""Experiment runner, scaling fits and bound curves."""

from .analysis import GILL_MASSAR, ScalingFit, bound_curves, default_window, fit_scaling
from .config import ESTIMATORS, ExperimentConfig, log_checkpoints
from .io import CSV_COLUMNS, read_curve_csv, summary_dict, write_summary_json, write_trials_csv
from .runner import (
    EnsembleResult,
    TrialResult,
    run_ensemble,
    run_trial,
    summarize,
    true_state,
)
