"""Trajectory simulation and ensemble averaging."""

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..adaptive import (
    SelfGuidedState,
    choose_next,
    fix_gauge,
    self_guided_step,
    shot_oracle,
    static_measurements,
    two_step_schedule,
)
from ..adaptive.strategies import random_projector_states
from ..errors import TomographyError
from ..estimators import (
    CountVector,
    SmcSettings,
    bme,
    linear_inversion,
    mean_bures_to_bme,
    mle_estimate,
    smc_init,
    update_row,
    update_rows,
)
from ..measurement import _inverse_cdf, mub6_measurements, projector_rows
from ..priors import ginibre, haar_state, sample_prior
from ..seeding import make_rng
from ..states import (
    bures_distance,
    coords_from_density,
    density_from_coords,
    fidelity,
    hs_distance,
    project_to_physical,
    pure_density,
    trace_distance,
)

# spawn-key slots of the per-replica random streams
TRUTH, OUTCOMES, STRATEGY, PARTICLES, JITTER = range(5)
METRICS = ("infidelity", "bures_sq", "trace_dist", "hs_dist", "posterior_size", "seconds")
WORKERS_ENV = "ADAPTOMO_WORKERS"


@dataclass(frozen=True)
class TrialResult:
    """Per-checkpoint metrics of one replica; every metric array aligns with ``n``."""

    replica: int
    n: np.ndarray
    infidelity: np.ndarray
    bures_sq: np.ndarray
    trace_dist: np.ndarray
    hs_dist: np.ndarray
    posterior_size: np.ndarray
    seconds: np.ndarray


@dataclass(frozen=True)
class EnsembleResult:
    """Per-checkpoint statistics over replicas.

    ``stats[metric]`` holds arrays ``mean``, ``median``, ``sem`` (standard
    error of the mean) and ``median_se`` (bootstrap standard error).
    """

    n: np.ndarray
    stats: dict
    trials: list

    @property
    def mean(self):
        return self.stats["infidelity"]["mean"]

    @property
    def median(self):
        return self.stats["infidelity"]["median"]

    @property
    def sem(self):
        return self.stats["infidelity"]["sem"]


def true_state(cfg, replica):
    """The fixed true state of a replica."""
    if cfg.true_coords is not None:
        return density_from_coords(np.array(cfg.true_coords), cfg.dim)
    return sample_prior(cfg.truth_source, make_rng(cfg.seed, replica, TRUTH))


class _Truth:
    """Outcome simulator for one trajectory, with optional misalignment jitter."""

    def __init__(self, rho, jitter, rng_outcomes, rng_jitter):
        self.rho = rho
        self.x = coords_from_density(rho)
        self.jitter = jitter
        self.rng = rng_outcomes
        self.rng_jitter = rng_jitter

    def coords(self, n):
        if not self.jitter:
            return np.broadcast_to(self.x, (n, len(self.x)))
        d = self.rho.shape[0]
        # Cayley transform of a scaled GUE matrix: exactly unitary, close to 1
        g = ginibre(d, self.rng_jitter, size=n)
        h = (g + np.swapaxes(g.conj(), -1, -2)) * (self.jitter / 4)
        eye = np.eye(d)
        u = np.linalg.solve(eye + 1j * h, eye - 1j * h)
        rho = u @ self.rho @ np.swapaxes(u.conj(), -1, -2)
        return coords_from_density(rho)

    def sample_rows(self, effect_rows):
        """Outcomes for a shot sequence given each shot's ``(k, m + 1)`` row table."""
        n = len(effect_rows)
        x = self.coords(n)
        p = effect_rows[:, :, 0] + np.einsum("nkm,nm->nk", effect_rows[:, :, 1:], x)
        p = np.clip(p, 0.0, None)
        cdf = np.cumsum(p, axis=1)
        cdf /= cdf[:, -1:]
        u = self.rng.random(n)
        out = (cdf < u[:, None]).sum(axis=1)
        return np.minimum(out, effect_rows.shape[1] - 1)

    def sample(self, povm):
        x = self.coords(1)[0]
        p = np.clip(povm.rows[:, 0] + povm.rows[:, 1:] @ x, 0.0, None)
        return _inverse_cdf(p / p.sum(), self.rng.random())


def _binary_tables(rows0):
    # two-outcome row tables from the outcome-0 rows of projectors
    comp = np.concatenate([1.0 - rows0[:, :1], -rows0[:, 1:]], axis=1)
    return np.stack([rows0, comp], axis=1)


class _Estimator:
    """Accumulates data for one of the supported estimators."""

    def __init__(self, cfg, replica, measurements=()):
        self.kind = cfg.estimator
        self.hedging = cfg.hedging
        self.measurements = list(measurements)
        self.counts = np.zeros((len(self.measurements), 4))
        if self.kind == "smc_bme":
            settings = SmcSettings(
                resampler=cfg.resampler, liu_west_a=cfg.liu_west_a, mh_steps=cfg.mh_steps
            )
            self.ps = smc_init(
                cfg.prior, cfg.n_particles, make_rng(cfg.seed, replica, PARTICLES), settings
            )

    def add_measurements(self, measurements):
        self.measurements += list(measurements)
        self.counts = np.vstack([self.counts, np.zeros((len(measurements), 4))])

    def absorb(self, tables, outcomes, which=None):
        """Add shots given their row tables, outcomes and measurement indices."""
        if self.kind == "smc_bme":
            self.ps = update_rows(self.ps, tables[np.arange(len(outcomes)), outcomes])
        else:
            np.add.at(self.counts, (which, outcomes), 1.0)

    def estimate(self):
        if self.kind == "smc_bme":
            return bme(self.ps)
        data = [
            CountVector(i, self.counts[i, : m.n_outcomes])
            for i, m in enumerate(self.measurements)
            if self.counts[i].sum() > 0
        ]
        if self.kind == "linear":
            return project_to_physical(linear_inversion(data, self.measurements)[0])
        return mle_estimate(data, self.measurements, self.hedging)

    def posterior_size(self):
        return mean_bures_to_bme(self.ps) if self.kind == "smc_bme" else np.nan


def _metrics(rho_true, rho_hat):
    f = fidelity(rho_true, rho_hat)
    return (
        1.0 - f,
        bures_distance(rho_true, rho_hat) ** 2,
        trace_distance(rho_true, rho_hat),
        hs_distance(rho_true, rho_hat),
    )


def _tables(measurements):
    return np.stack([m.rows for m in measurements])


def _run_static(cfg, replica, truth, record):
    ms = static_measurements(cfg.strategy.static_set)
    est = _Estimator(cfg, replica, ms)
    all_tables = _tables(ms)
    done = 0
    for n in cfg.checkpoints:
        which = np.arange(done, n) % len(ms)
        tables = all_tables[which]
        est.absorb(tables, truth.sample_rows(tables), which)
        done = n
        record(n, est)


def _run_random(cfg, replica, truth, record, rng):
    est = _Estimator(cfg, replica)
    done = 0
    for n in cfg.checkpoints:
        psis = random_projector_states(cfg.strategy, rng, n - done)
        tables = _binary_tables(projector_rows(psis))
        est.absorb(tables, truth.sample_rows(tables))
        done = n
        record(n, est)


def _run_two_step(cfg, replica, truth, record, rng):
    # every checkpoint is a separate protocol whose budget is that checkpoint
    mub = mub6_measurements()
    variant = cfg.strategy.schedule_variant
    for n in cfg.checkpoints:
        plan = two_step_schedule(n, variant)
        first = _Estimator(cfg, replica, mub)
        which = np.arange(plan.n0) % 3
        tables = _tables(mub)[which]
        first.absorb(tables, truth.sample_rows(tables), which)
        plan = two_step_schedule(n, variant, first.estimate())
        axes = plan.second_phase_axes()
        est = first
        est.add_measurements(axes)
        n2 = n - plan.n0
        if plan.axis_probs is None:
            which2 = np.arange(n2) % 3
        else:
            which2 = rng.choice(3, size=n2, p=plan.axis_probs)
        tables = _tables(axes)[which2]
        est.absorb(tables, truth.sample_rows(tables), which2 + 3)
        record(n, est)


def _run_adaptive(cfg, replica, truth, record, rng):
    est = _Estimator(cfg, replica)
    targets = set(cfg.checkpoints)
    strategy = cfg.strategy
    ps = est.ps
    for shot in range(1, cfg.n_max + 1):
        povm = choose_next(strategy, ps, rng)
        ps = update_row(ps, povm.rows[truth.sample(povm)])
        if shot in targets:
            est.ps = ps
            record(shot, est)


def _run_self_guided(cfg, replica, truth, record, rng):
    vals, vecs = np.linalg.eigh(truth.rho)
    psi_true = vecs[:, -1]
    oracle = shot_oracle(psi_true)
    state = SelfGuidedState(fix_gauge(haar_state(cfg.dim, rng)))
    targets = set(cfg.checkpoints)
    for it in range(1, cfg.n_max + 1):
        state = self_guided_step(state, cfg.strategy.shots_per_eval, oracle, truth.rng)
        if it in targets:
            record(it, pure_density(state.psi))


def run_trial(cfg, replica):
    """Simulate one replica and return its checkpoint metrics.

    Deterministic in ``(cfg.seed, replica)``: the true state, the outcomes,
    the strategy's own randomness and the particle filter draw from separate
    streams addressed by these keys.
    """
    rho_true = true_state(cfg, replica)
    truth = _Truth(
        rho_true,
        cfg.angle_jitter,
        make_rng(cfg.seed, replica, OUTCOMES),
        make_rng(cfg.seed, replica, JITTER),
    )
    rng = make_rng(cfg.seed, replica, STRATEGY)
    rows = []
    start = time.perf_counter()

    def record(n, est):
        rho_hat = est if isinstance(est, np.ndarray) else est.estimate()
        size = np.nan if isinstance(est, np.ndarray) else est.posterior_size()
        secs = time.perf_counter() - start if cfg.timing else np.nan
        rows.append((n, *_metrics(rho_true, rho_hat), size, secs))

    kind = cfg.strategy.kind
    try:
        if kind == "static_cycle":
            _run_static(cfg, replica, truth, record)
        elif kind == "random_haar":
            _run_random(cfg, replica, truth, record, rng)
        elif kind in ("two_step", "two_step_guo"):
            _run_two_step(cfg, replica, truth, record, rng)
        elif kind == "self_guided":
            _run_self_guided(cfg, replica, truth, record, rng)
        else:
            _run_adaptive(cfg, replica, truth, record, rng)
    except TomographyError as exc:
        at = f"replica {replica}, after checkpoint {rows[-1][0]}" if rows else f"replica {replica}"
        raise type(exc)(f"{at}: {exc}") from exc
    cols = np.array(rows, dtype=float).T
    return TrialResult(replica, cols[0].astype(int), *cols[1:])


def _median_se(values, rng, n_boot=200):
    idx = rng.integers(0, len(values), size=(n_boot, len(values)))
    return np.median(values[idx], axis=1).std(ddof=1) if len(values) > 1 else np.nan


def summarize(trials, seed=0):
    """Mean, median and their standard errors per checkpoint and metric."""
    stats = {}
    rng = make_rng(seed, 2**31 - 1)
    for metric in METRICS[:-1]:
        table = np.array([getattr(t, metric) for t in trials])
        r = len(trials)
        stats[metric] = {
            "mean": table.mean(axis=0),
            "median": np.median(table, axis=0),
            "sem": table.std(axis=0, ddof=1) / np.sqrt(r) if r > 1 else np.full(table.shape[1], np.nan),
            "median_se": np.array([_median_se(col, rng) for col in table.T]),
        }
    return stats


def default_workers():
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def run_ensemble(cfg, workers=None):
    """Run every replica and aggregate; identical output for any worker count."""
    workers = default_workers() if workers is None else max(1, int(workers))
    replicas = range(cfg.replicas)
    if workers == 1 or cfg.replicas == 1:
        trials = [run_trial(cfg, r) for r in replicas]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            trials = list(pool.map(run_trial, [cfg] * cfg.replicas, replicas))
    return EnsembleResult(np.array(cfg.checkpoints), summarize(trials, cfg.seed), trials)
