"""Sequential Monte Carlo (particle filter) posterior over quantum states.

Particles are stored as generalized Bloch coordinates, so a measurement
outcome's likelihood is an affine function of each particle
(``p = row[0] + row[1:] @ x``, see :attr:`adaptomo.measurement.Povm.rows`) and
the weight update is a single matrix-vector product.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import DegeneratePosteriorError, DomainError
from ..priors import PriorSpec, log_prior_density, sample_coords
from ..states import (
    coords_from_density,
    density_from_coords,
    fidelities_to,
    n_coords,
    project_coords,
    validate_density,
)

RESAMPLERS = ("liu_west", "metropolis_hastings")
DEFAULT_PARTICLES = {2: 1000, 4: 4000}
WEIGHT_TOL = 1e-10
_CHUNK = 256


@dataclass(frozen=True)
class SmcSettings:
    """Tuning knobs of the particle filter.

    ``ess_fraction`` sets the resampling trigger ``ESS < ess_fraction * n``.
    """

    resampler: str = "liu_west"
    ess_fraction: float = 0.5
    liu_west_a: float = 0.98
    mh_steps: int = 10
    mh_scale: float = 1.0

    def __post_init__(self):
        if self.resampler not in RESAMPLERS:
            raise DomainError(f"unknown resampler {self.resampler!r}")
        if not 0 < self.liu_west_a <= 1:
            raise DomainError("Liu-West parameter must lie in (0, 1]")
        if not 0 <= self.ess_fraction <= 1:
            raise DomainError("ess_fraction must lie in [0, 1]")


class _History:
    """Append-only log of observed effect rows shared between successive sets."""

    def __init__(self, chunks=None, length=0):
        self.chunks = list(chunks or [])
        self.length = length

    def append(self, rows):
        self.chunks.append(np.atleast_2d(rows))
        self.length += len(self.chunks[-1])

    def rows(self, length):
        if length == 0:
            return np.empty((0, 0))
        return np.vstack(self.chunks)[:length]


@dataclass(frozen=True, eq=False)
class ParticleSet:
    """Weighted particle approximation of a posterior.

    Attributes
    ----------
    coords : ndarray, shape (n, d**2 - 1)
        Generalized Bloch coordinates of the particles.
    weights : ndarray, shape (n,)
        Normalized weights.
    history_length : int
        Number of measurement records absorbed so far.
    """

    coords: np.ndarray
    weights: np.ndarray
    dim: int
    prior: PriorSpec
    rng: np.random.Generator
    settings: SmcSettings = field(default_factory=SmcSettings)
    history_length: int = 0
    n_resamples: int = 0
    _history: _History = field(default_factory=_History, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "coords", np.ascontiguousarray(self.coords, dtype=float))
        if self.coords.ndim != 2 or self.coords.shape[1] != n_coords(self.dim):
            raise DomainError(f"coords must have shape (n, {n_coords(self.dim)})")
        if len(self.weights) != len(self.coords) or len(self.weights) < 2:
            raise DomainError("need at least two particles with one weight each")
        if abs(self.weights.sum() - 1.0) > WEIGHT_TOL or np.any(self.weights < 0):
            raise DomainError("weights must be nonnegative and sum to one")

    @property
    def n(self):
        return len(self.weights)

    @property
    def states(self):
        """Particle density matrices, shape ``(n, d, d)``."""
        return density_from_coords(self.coords, self.dim)

    def mean_coords(self):
        return self.weights @ self.coords

    def history_rows(self):
        """Effect rows of every absorbed outcome, in order."""
        return self._history.rows(self.history_length)

    def _with_history(self, rows):
        hist = self._history
        if hist.length != self.history_length:
            # this set was branched from; copy before appending
            hist = _History([self.history_rows()] if self.history_length else [], self.history_length)
        hist.append(rows)
        return hist


def smc_init(prior, n_particles=None, seed=None, settings=None):
    """Particles drawn i.i.d. from ``prior`` with equal weights."""
    if n_particles is None:
        n_particles = DEFAULT_PARTICLES[prior.dim]
    if n_particles < 2:
        raise DomainError("need at least two particles")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    coords = sample_coords(prior, n_particles, rng)
    return ParticleSet(
        coords=coords,
        weights=np.full(n_particles, 1.0 / n_particles),
        dim=prior.dim,
        prior=prior,
        rng=rng,
        settings=settings or SmcSettings(),
    )


def effective_sample_size(ps):
    """``1 / sum w^2``, between 1 and the number of particles."""
    return float(1.0 / np.sum(ps.weights**2))


def _likelihoods(coords, row):
    return np.clip(row[0] + coords @ row[1:], 0.0, None)


def smc_update(ps, record):
    """Bayes update with one :class:`~adaptomo.measurement.MeasurementRecord`.

    Resamples when the effective sample size falls below the threshold.
    """
    if record.povm.dim != ps.dim:
        raise DomainError("measurement dimension does not match the particles")
    return update_row(ps, record.povm.rows[record.outcome])


def update_row(ps, row):
    """Single-shot update given the observed effect's probability row."""
    w = ps.weights * _likelihoods(ps.coords, row)
    total = w.sum()
    if not total > 0:
        raise DegeneratePosteriorError("observed outcome has zero probability under every particle")
    w = w / total
    new = replace(
        ps,
        weights=w,
        history_length=ps.history_length + 1,
        _history=ps._with_history(row),
    )
    if 1.0 / np.sum(w**2) < ps.settings.ess_fraction * ps.n:
        new = resample(new)
    return new


def update_rows(ps, rows):
    """Absorb a sequence of outcomes at once.

    Equivalent to calling :func:`update_row` on each row in turn, including
    the positions at which resampling is triggered, but evaluates the weight
    trajectory for a block of shots with one matrix product.
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    start = 0
    while start < len(rows):
        block = rows[start : start + _CHUNK]
        with np.errstate(divide="ignore"):
            loglik = np.log(np.clip(block[:, 0] + ps.coords @ block[:, 1:].T, 0.0, None))
            logw = np.log(ps.weights)[:, None] + np.cumsum(loglik, axis=1)
        top = logw.max(axis=0)
        dead = np.flatnonzero(~np.isfinite(top))
        a = np.exp(logw - np.where(np.isfinite(top), top, 0.0))
        with np.errstate(invalid="ignore"):
            # all-zero columns (impossible outcomes) are caught below
            ess = a.sum(axis=0) ** 2 / np.sum(a**2, axis=0)
        low = np.flatnonzero(ess < ps.settings.ess_fraction * ps.n)
        stop = len(block) - 1
        if len(low):
            stop = low[0]
        if len(dead) and dead[0] <= stop:
            raise DegeneratePosteriorError(
                f"outcome {ps.history_length + dead[0]} has zero probability under every particle"
            )
        w = a[:, stop] / a[:, stop].sum()
        ps = replace(
            ps,
            weights=w,
            history_length=ps.history_length + stop + 1,
            _history=ps._with_history(block[: stop + 1]),
        )
        if len(low):
            ps = resample(ps)
        start += stop + 1
    return ps


def bme(ps):
    """Bayesian mean estimate ``sum_s w_s rho_s``."""
    return density_from_coords(ps.mean_coords(), ps.dim)


def posterior_covariance(ps):
    centered = ps.coords - ps.mean_coords()
    return (centered * ps.weights[:, None]).T @ centered


def mean_bures_to_bme(ps):
    """Posterior mean of ``d_B^2(rho_s, rho_BME)``, an error proxy."""
    fid = fidelities_to(bme(ps), ps.coords, ps.dim)
    return float(ps.weights @ (2.0 - 2.0 * np.sqrt(fid)))


def _cov_root(cov):
    evals, evecs = np.linalg.eigh((cov + cov.T) / 2)
    return evecs * np.sqrt(np.clip(evals, 0.0, None))


def _pure_coords(x, dim):
    """Nearest rank-one states (keeps only the top eigenvector)."""
    if dim == 2:
        r = np.linalg.norm(x, axis=1, keepdims=True)
        out = np.where(r > 0, x / np.where(r > 0, r, 1.0), np.array([0.0, 0.0, 1.0]))
        return out
    evecs = np.linalg.eigh(density_from_coords(x, dim))[1][:, :, -1]
    return coords_from_density(np.einsum("ni,nj->nij", evecs, evecs.conj()))


def project_to_prior_support(x, prior):
    """Map coordinate rows back into the support of the prior."""
    if prior.kind == "haar_pure":
        return _pure_coords(x, prior.dim)
    return project_coords(x, prior.dim)


def resample(ps, method=None, **params):
    """Reset to equal weights while preserving the posterior.

    ``liu_west`` (default) draws particles multinomially, contracts them
    towards the posterior mean by ``a`` and adds Gaussian noise with
    covariance ``(1 - a^2) Cov``; ``metropolis_hastings`` instead runs a
    short random-walk chain per particle against the exact posterior built
    from the full measurement history.
    """
    method = method or ps.settings.resampler
    if method == "liu_west":
        coords = _liu_west(ps, params.get("a", ps.settings.liu_west_a))
    elif method == "metropolis_hastings":
        coords = _metropolis_hastings(
            ps, params.get("steps", ps.settings.mh_steps), params.get("scale", ps.settings.mh_scale)
        )
    else:
        raise DomainError(f"unknown resampler {method!r}")
    return replace(
        ps,
        coords=coords,
        weights=np.full(ps.n, 1.0 / ps.n),
        n_resamples=ps.n_resamples + 1,
    )


def _liu_west(ps, a):
    rng = ps.rng
    idx = rng.choice(ps.n, size=ps.n, p=ps.weights)
    mean = ps.mean_coords()
    root = _cov_root(posterior_covariance(ps))
    noise = rng.standard_normal((ps.n, root.shape[1])) @ root.T
    x = a * ps.coords[idx] + (1 - a) * mean + np.sqrt(1 - a * a) * noise
    return project_to_prior_support(x, ps.prior)


def _compressed_history(ps):
    rows = ps.history_rows()
    if len(rows) == 0:
        return np.empty((0, n_coords(ps.dim) + 1)), np.empty(0)
    uniq, counts = np.unique(rows, axis=0, return_counts=True)
    return uniq, counts.astype(float)


def _loglik_coords(x, uniq, counts):
    if len(counts) == 0:
        return np.zeros(len(x))
    with np.errstate(divide="ignore"):
        logp = np.log(np.clip(uniq[:, 0] + x @ uniq[:, 1:].T, 0.0, None))
    return np.where(counts > 0, logp * counts, 0.0).sum(axis=1)


def _metropolis_hastings(ps, steps, scale):
    rng = ps.rng
    uniq, counts = _compressed_history(ps)
    idx = rng.choice(ps.n, size=ps.n, p=ps.weights)
    if ps.prior.kind == "haar_pure":
        return _mh_pure(ps, ps.coords[idx], uniq, counts, steps, scale)
    x = ps.coords[idx].copy()
    m = x.shape[1]
    root = _cov_root(posterior_covariance(ps)) * (2.38 / np.sqrt(m)) * scale

    def logpost(z):
        lp = log_prior_density(ps.prior, z)
        ok = np.isfinite(lp)
        out = np.full(len(z), -np.inf)
        out[ok] = lp[ok] + _loglik_coords(z[ok], uniq, counts)
        return out

    current = logpost(x)
    for _ in range(steps):
        prop = x + rng.standard_normal(x.shape) @ root.T
        cand = logpost(prop)
        # a chain started on the support boundary (density -inf) takes any
        # proposal inside; comparing -inf with -inf would leave it stuck
        with np.errstate(invalid="ignore"):
            ratio = np.where(np.isfinite(current), cand - current, np.inf)
        accept = np.isfinite(cand) & (np.log(rng.random(len(x))) < ratio)
        x[accept] = prop[accept]
        current[accept] = cand[accept]
    return x


def _mh_pure(ps, x, uniq, counts, steps, scale):
    # random walk on unit vectors; the proposal is unitarily symmetric, so the
    # Haar prior cancels in the acceptance ratio
    rng = ps.rng
    d = ps.dim
    psi = np.linalg.eigh(density_from_coords(x, d))[1][:, :, -1]
    spread = np.sqrt(max(mean_bures_to_bme(ps), 1e-10))
    sigma = scale * spread / np.sqrt(d)

    def state_coords(v):
        return coords_from_density(np.einsum("ni,nj->nij", v, v.conj()))

    current = _loglik_coords(state_coords(psi), uniq, counts)
    for _ in range(steps):
        g = rng.standard_normal((len(psi), d)) + 1j * rng.standard_normal((len(psi), d))
        prop = psi + sigma * g / np.sqrt(2)
        prop /= np.linalg.norm(prop, axis=1, keepdims=True)
        cand = _loglik_coords(state_coords(prop), uniq, counts)
        accept = np.log(rng.random(len(psi))) < cand - current
        psi[accept] = prop[accept]
        current[accept] = cand[accept]
    return state_coords(psi)


def save_particles(ps, path):
    """Write a particle set as text: one particle per line.

    Each line holds the weight followed by the row-major entries of the
    particle's density matrix, written as Python complex literals. Lines
    starting with ``#`` are comments; the header records the dimension.
    """
    states = ps.states
    with open(path, "w") as fh:
        fh.write("# adaptomo particle set\n")
        fh.write(f"# dim {ps.dim}\n")
        fh.write(f"# count {ps.n}\n")
        for w, rho in zip(ps.weights, states):
            entries = " ".join(f"{z.real:.17g}{z.imag:+.17g}j" for z in rho.ravel())
            fh.write(f"{w:.17g} {entries}\n")


def load_particles(path, prior=None, seed=None, settings=None):
    """Read a file written by :func:`save_particles`, validating every state."""
    weights, states = [], []
    dim = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if len(parts) == 2 and parts[0] == "dim":
                    dim = int(parts[1])
                continue
            tokens = line.split()
            try:
                w = float(tokens[0])
                entries = np.array([complex(t) for t in tokens[1:]])
            except ValueError as exc:
                raise DomainError(f"line {lineno}: cannot parse particle ({exc})") from None
            d = int(round(np.sqrt(len(entries))))
            if d * d != len(entries) or (dim is not None and d != dim):
                raise DomainError(f"line {lineno}: expected {dim}x{dim} entries")
            try:
                validate_density(entries.reshape(d, d), name=f"particle on line {lineno}")
            except DomainError as exc:
                raise DomainError(str(exc)) from None
            weights.append(w)
            states.append(entries.reshape(d, d))
    if not states:
        raise DomainError("no particles found")
    states = np.array(states)
    dim = states.shape[1]
    weights = np.array(weights)
    if abs(weights.sum() - 1.0) > WEIGHT_TOL:
        raise DomainError("particle weights do not sum to one")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return ParticleSet(
        coords=coords_from_density(states),
        weights=weights,
        dim=dim,
        prior=prior or PriorSpec("bures_uniform", dim),
        rng=rng,
        settings=settings or SmcSettings(),
    )
