"""Measurement-selection strategies and the per-shot decision rule."""

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError, DimensionError
from ..measurement import (
    PLATONIC_SOLIDS,
    mub6_measurements,
    pauli_product_measurements,
    platonic_measurements,
    projector_measurement,
    projector_rows,
    tetrahedron_povm,
)
from ..priors import haar_state
from ..states import check_dim, density_from_coords
from .two_step import TWO_STEP_VARIANTS, rotation_to
from .utilities import binary_fidelity_utility, binary_info_gain

STRATEGY_KINDS = (
    "static_cycle",
    "random_haar",
    "two_step",
    "two_step_guo",
    "info_gain",
    "fidelity_utility",
    "aligned_tetrahedron",
    "self_guided",
)
RESTRICTIONS = ("unconstrained", "factorized")
STATIC_SETS = {2: ("mub6", "tetrahedron") + PLATONIC_SOLIDS, 4: ("pauli_products",)}
DEFAULT_CANDIDATES = {2: 30, 4: 60}
TIE_TOL = 1e-12


@dataclass(frozen=True)
class Strategy:
    """A measurement-selection rule and its parameters.

    Parameters
    ----------
    kind : str
        One of :data:`STRATEGY_KINDS`.
    dim : int
        Hilbert-space dimension, 2 or 4.
    restriction : str
        ``factorized`` limits two-qubit projectors to product states.
    n_candidates : int, optional
        Random candidates per step for the utility kinds; defaults to 30
        for qubits and 60 for two qubits.
    static_set : str
        Measurement set cycled by ``static_cycle``.
    variant : str
        First-phase rule of ``two_step`` (``bagan`` or ``worst_case``).
    shots_per_eval : int
        Shots per probe state for ``self_guided``.
    """

    kind: str
    dim: int = 2
    restriction: str = "unconstrained"
    n_candidates: int = None
    static_set: str = "mub6"
    variant: str = "bagan"
    shots_per_eval: int = 10

    def __post_init__(self):
        if self.kind not in STRATEGY_KINDS:
            raise ConfigurationError(f"unknown strategy kind {self.kind!r}")
        try:
            check_dim(self.dim)
        except DimensionError as exc:
            raise ConfigurationError(str(exc)) from None
        if self.restriction not in RESTRICTIONS:
            raise ConfigurationError(f"unknown restriction {self.restriction!r}")
        if self.restriction == "factorized" and self.dim != 4:
            raise ConfigurationError("the factorized restriction applies to two qubits only")
        if self.n_candidates is None:
            object.__setattr__(self, "n_candidates", DEFAULT_CANDIDATES[self.dim])
        if self.n_candidates < 1:
            raise ConfigurationError("n_candidates must be positive")
        if self.kind == "static_cycle" and self.static_set not in STATIC_SETS[self.dim]:
            raise ConfigurationError(
                f"static set {self.static_set!r} unavailable for dim {self.dim}; "
                f"choose from {STATIC_SETS[self.dim]}"
            )
        if self.kind in ("two_step", "two_step_guo", "aligned_tetrahedron") and self.dim != 2:
            raise ConfigurationError(f"{self.kind} is defined for qubits only")
        if self.kind == "two_step" and self.variant not in TWO_STEP_VARIANTS[:2]:
            raise ConfigurationError(f"two_step variant must be bagan or worst_case, got {self.variant!r}")
        if self.shots_per_eval < 1:
            raise ConfigurationError("shots_per_eval must be positive")

    @property
    def data_independent(self):
        """True when the choice never looks at the posterior."""
        return self.kind in ("static_cycle", "random_haar")

    @property
    def schedule_variant(self):
        return "guo" if self.kind == "two_step_guo" else self.variant


def static_measurements(name):
    if name == "mub6":
        return mub6_measurements()
    if name == "tetrahedron":
        return [tetrahedron_povm()]
    if name == "pauli_products":
        return pauli_product_measurements()
    return platonic_measurements(name)


def _kron_rows(a, b):
    return np.einsum("ci,cj->cij", a, b).reshape(len(a), -1)


def _top_eigvec(m):
    return np.linalg.eigh(m)[1][:, -1]


def _partial_traces(rho):
    r = rho.reshape(2, 2, 2, 2)
    return np.einsum("ijkj->ik", r), np.einsum("ijil->jl", r)


def candidate_states(strategy, ps, rng):
    """Candidate projector states for the utility kinds, shape ``(c, d)``.

    Random draws come first, followed by states built from the current
    Bayesian mean: its eigenbasis for qubits (one two-outcome measurement),
    its eigenvectors for unconstrained two-qubit searches, or products of the
    eigenvectors of its two marginals under the factorized restriction.
    """
    c = strategy.n_candidates
    mean = density_from_coords(ps.mean_coords(), ps.dim)
    if strategy.dim == 2:
        return np.vstack([haar_state(2, rng, size=c), _top_eigvec(mean)[None]])
    if strategy.restriction == "factorized":
        rand = _kron_rows(haar_state(2, rng, size=c), haar_state(2, rng, size=c))
        va, vb = (np.linalg.eigh(m)[1].T for m in _partial_traces(mean))
        own = _kron_rows(np.repeat(va, 2, axis=0), np.tile(vb, (2, 1)))
        return np.vstack([rand, own])
    return np.vstack([haar_state(4, rng, size=c), np.linalg.eigh(mean)[1].T])


def _argmax(values, rng):
    best = np.flatnonzero(values >= values.max() - TIE_TOL)
    return int(best[0] if len(best) == 1 else rng.choice(best))


def select_projector(strategy, ps, rng):
    """State ``psi`` of the two-outcome projector a utility strategy picks."""
    psis = candidate_states(strategy, ps, rng)
    rows = projector_rows(psis)
    if strategy.kind == "info_gain":
        u = binary_info_gain(ps, rows)
    else:
        u = binary_fidelity_utility(ps, rows)
    return psis[_argmax(u, rng)]


def aligned_tetrahedron(ps):
    """Tetrahedron POVM with its first vector along the Bayesian mean's Bloch vector.

    A maximally mixed mean leaves the canonical orientation (first vector +z).
    """
    if ps.dim != 2:
        raise DimensionError("aligned_tetrahedron requires a qubit particle set")
    s = ps.mean_coords()
    r = np.linalg.norm(s)
    rot = np.eye(3) if r < 1e-12 else rotation_to(s / r)
    return tetrahedron_povm(rot)


def random_projector_states(strategy, rng, n):
    """``n`` random projector states, product states under the factorized restriction."""
    if strategy.restriction == "factorized":
        return _kron_rows(haar_state(2, rng, size=n), haar_state(2, rng, size=n))
    return haar_state(strategy.dim, rng, size=n)


def choose_next(strategy, ps, rng, plan=None):
    """Measurement for the next shot.

    Utility kinds score the candidate set of :func:`candidate_states` and
    return the maximizer, breaking exact ties uniformly at random.
    ``static_cycle`` cycles its set by the posterior's history length;
    ``random_haar`` ignores the posterior. The two-step kinds need the
    :class:`~adaptomo.adaptive.two_step.TwoStepPlan` of the run. For
    ``self_guided`` the projector onto the dominant eigenvector of the
    Bayesian mean is returned, the measurement an unperturbed step would
    probe.

    Raises
    ------
    DimensionError
        If strategy and particle dimensions differ.
    StateError
        If a second-phase two-step measurement is requested before the plan
        carries a first estimate.
    """
    if ps.dim != strategy.dim:
        raise DimensionError("strategy and particle set dimensions differ")
    kind = strategy.kind
    shot = ps.history_length
    if kind == "static_cycle":
        ms = static_measurements(strategy.static_set)
        return ms[shot % len(ms)]
    if kind == "random_haar":
        return projector_measurement(random_projector_states(strategy, rng, 1)[0], "haar")
    if kind in ("info_gain", "fidelity_utility"):
        return projector_measurement(select_projector(strategy, ps, rng), kind)
    if kind == "aligned_tetrahedron":
        return aligned_tetrahedron(ps)
    if kind == "self_guided":
        mean = density_from_coords(ps.mean_coords(), ps.dim)
        return projector_measurement(_top_eigvec(mean), "self-guided")
    if plan is None:
        raise ConfigurationError(f"{kind} needs a two-step plan")
    if plan.phase(shot) == 1:
        return mub6_measurements()[shot % 3]
    axes = plan.second_phase_axes()
    if plan.axis_probs is None:
        return axes[(shot - plan.n0) % 3]
    return axes[int(rng.choice(3, p=plan.axis_probs))]

