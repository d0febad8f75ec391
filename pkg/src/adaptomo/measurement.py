"""POVM construction, Born-rule probabilities and outcome sampling."""

from dataclasses import dataclass
from functools import cached_property
from itertools import product

import numpy as np

from .errors import DimensionError, DomainError
from .states import (
    PAULIS,
    PSD_TOL,
    check_dim,
    n_coords,
    pauli_basis,
    pure_density,
)

COMPLETENESS_TOL = 1e-10
NORM_TOL = 1e-10

GOLDEN = (1 + np.sqrt(5)) / 2


@dataclass(frozen=True, eq=False)
class Povm:
    """A finite list of PSD effects resolving the identity.

    Parameters
    ----------
    effects : array_like, shape (k, d, d)
        The measurement operators, one per outcome.
    label : str
        Free-form tag, used in logs and reports.
    """

    effects: np.ndarray
    label: str = ""

    def __post_init__(self):
        effects = np.array(self.effects, dtype=complex)
        if effects.ndim != 3 or effects.shape[1] != effects.shape[2]:
            raise DimensionError(f"effects must have shape (k, d, d), got {effects.shape}")
        check_dim(effects.shape[1])
        if effects.shape[0] < 2:
            raise DomainError("a POVM needs at least two effects")
        for i, e in enumerate(effects):
            if np.max(np.abs(e - e.conj().T)) > COMPLETENESS_TOL:
                raise DomainError(f"effect {i} is not Hermitian")
            if np.linalg.eigvalsh(e)[0] < -PSD_TOL:
                raise DomainError(f"effect {i} is not positive semidefinite")
        total = effects.sum(axis=0)
        if np.max(np.abs(total - np.eye(effects.shape[1]))) > COMPLETENESS_TOL:
            raise DomainError("effects do not sum to the identity")
        effects.setflags(write=False)
        object.__setattr__(self, "effects", effects)

    @classmethod
    def _unchecked(cls, effects, label=""):
        # internal constructor for effects built from known-good projectors
        obj = object.__new__(cls)
        effects = np.asarray(effects, dtype=complex)
        effects.setflags(write=False)
        object.__setattr__(obj, "effects", effects)
        object.__setattr__(obj, "label", label)
        return obj

    @property
    def dim(self):
        return self.effects.shape[1]

    @property
    def n_outcomes(self):
        return self.effects.shape[0]

    @cached_property
    def rows(self):
        """Affine coefficients of the outcome probabilities in Bloch coordinates.

        ``p_k(x) = rows[k, 0] + rows[k, 1:] @ x`` for a state with generalized
        Bloch coordinates ``x``.
        """
        d = self.dim
        basis = pauli_basis(d)
        out = np.empty((self.n_outcomes, n_coords(d) + 1))
        out[:, 0] = np.real(np.trace(self.effects, axis1=1, axis2=2)) / d
        out[:, 1:] = np.real(np.einsum("kij,pji->kp", self.effects, basis)) / d
        out.setflags(write=False)
        return out

    def __repr__(self):
        return f"Povm(label={self.label!r}, dim={self.dim}, n_outcomes={self.n_outcomes})"


@dataclass(frozen=True)
class MeasurementRecord:
    """One observed outcome of one measurement."""

    povm: Povm
    outcome: int

    def __post_init__(self):
        if not 0 <= self.outcome < self.povm.n_outcomes:
            raise DomainError(
                f"outcome {self.outcome} out of range for {self.povm.n_outcomes} effects"
            )


def bloch_projectors(v):
    """The pair ``(I +/- v.sigma) / 2`` for a unit Bloch direction ``v``."""
    v = np.asarray(v, dtype=float)
    vs = sum(c * p for c, p in zip(v, PAULIS))
    eye = np.eye(2)
    return np.array([(eye + vs) / 2, (eye - vs) / 2])


def axis_measurement(v, label=""):
    """Two-outcome projective qubit measurement along Bloch direction ``v``."""
    v = np.asarray(v, dtype=float)
    norm = np.linalg.norm(v)
    if abs(norm - 1.0) > NORM_TOL:
        raise DomainError(f"measurement direction must be a unit vector, got norm {norm}")
    return Povm._unchecked(bloch_projectors(v), label)


def mub6_measurements():
    """The three Pauli measurements of the six-state protocol.

    Measurement ``i`` projects onto the eigenbasis of ``sigma_i`` (x, y, z
    order); outcome 0 is the ``+1`` eigenvector. The z measurement is
    ``{|0><0|, |1><1|}``.
    """
    s = 1 / np.sqrt(2)
    plus_x = np.array([s, s])
    minus_x = np.array([s, -s])
    plus_y = np.array([s, 1j * s])
    minus_y = np.array([s, -1j * s])
    zero = np.array([1, 0])
    one = np.array([0, 1])
    pairs = [(plus_x, minus_x, "x"), (plus_y, minus_y, "y"), (zero, one, "z")]
    return [
        Povm._unchecked([pure_density(a), pure_density(b)], f"mub6-{tag}")
        for a, b, tag in pairs
    ]


TETRAHEDRON_POLAR = np.arccos(-1.0 / 3.0)


def tetrahedron_vectors():
    """Canonical unit vectors ``a_i`` with ``a_i . a_j = 4/3 delta_ij - 1/3``.

    ``a_1`` points along +z; the other three sit at the tetrahedral polar
    angle with azimuths 0, 120 and 240 degrees.
    """
    vecs = [np.array([0.0, 0.0, 1.0])]
    for phi in (0.0, 2 * np.pi / 3, 4 * np.pi / 3):
        vecs.append(
            np.array(
                [
                    np.sin(TETRAHEDRON_POLAR) * np.cos(phi),
                    np.sin(TETRAHEDRON_POLAR) * np.sin(phi),
                    np.cos(TETRAHEDRON_POLAR),
                ]
            )
        )
    return np.array(vecs)


def tetrahedron_povm(rotation=None):
    """Minimal qubit POVM ``M_i = (1 + a_i . sigma) / 4``.

    Parameters
    ----------
    rotation : ndarray, shape (3, 3), optional
        Proper rotation applied to the canonical tetrahedron vectors.
    """
    vecs = tetrahedron_vectors()
    if rotation is not None:
        vecs = vecs @ np.asarray(rotation, dtype=float).T
    eye = np.eye(2)
    effects = [(eye + sum(c * p for c, p in zip(a, PAULIS))) / 4 for a in vecs]
    return Povm(np.array(effects), "tetrahedron")


def projector_measurement(psi, label="projector"):
    """Two-outcome measurement ``{|psi><psi|, 1 - |psi><psi|}``."""
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1:
        raise DimensionError("psi must be a 1-D amplitude vector")
    check_dim(psi.shape[0])
    norm2 = np.vdot(psi, psi).real
    if abs(norm2 - 1.0) > NORM_TOL:
        raise DomainError(f"state is not normalized (|psi|^2 = {norm2})")
    proj = pure_density(psi)
    return Povm._unchecked([proj, np.eye(psi.shape[0]) - proj], label)


def factorized_projector(psi_a, psi_b):
    """Projector onto the product state ``psi_a (x) psi_b`` and its complement."""
    psi_a = np.asarray(psi_a, dtype=complex)
    psi_b = np.asarray(psi_b, dtype=complex)
    if psi_a.shape != (2,) or psi_b.shape != (2,):
        raise DimensionError("factorized projectors take two qubit states")
    for psi in (psi_a, psi_b):
        if abs(np.vdot(psi, psi).real - 1.0) > NORM_TOL:
            raise DomainError("state is not normalized")
    return projector_measurement(np.kron(psi_a, psi_b), "factorized")


def pauli_product_measurements():
    """Nine four-outcome product bases ``sigma_i (x) sigma_j`` for two qubits.

    Ordered ``xx, xy, xz, yx, ...``; outcome ``2a + b`` pairs outcome ``a``
    of the first factor with ``b`` of the second.
    """
    single = mub6_measurements()
    out = []
    for ma, mb in product(single, repeat=2):
        effects = [np.kron(ea, eb) for ea in ma.effects for eb in mb.effects]
        out.append(Povm._unchecked(effects, f"pauli-{ma.label[-1]}{mb.label[-1]}"))
    return out


def _solid_vertices(solid):
    if solid == "octahedron":
        verts = [v for i in range(3) for v in (np.eye(3)[i], -np.eye(3)[i])]
    elif solid == "cube":
        verts = [np.array(v, dtype=float) for v in product((1, -1), repeat=3)]
    elif solid == "icosahedron":
        verts = []
        for a, b in product((1, -1), repeat=2):
            base = np.array([0.0, a, b * GOLDEN])
            verts.extend(np.roll(base, k) for k in range(3))
    elif solid == "dodecahedron":
        verts = [np.array(v, dtype=float) for v in product((1, -1), repeat=3)]
        for a, b in product((1, -1), repeat=2):
            base = np.array([0.0, a / GOLDEN, b * GOLDEN])
            verts.extend(np.roll(base, k) for k in range(3))
    else:
        raise DomainError(f"unknown solid {solid!r}")
    return np.array([v / np.linalg.norm(v) for v in verts])


PLATONIC_SOLIDS = ("octahedron", "cube", "icosahedron", "dodecahedron")


def platonic_measurements(solid):
    """One two-outcome projective measurement per antipodal vertex pair.

    The representative of each pair is the vertex whose first nonzero
    coordinate is positive; measurements are sorted by that vertex in
    descending lexicographic order, so the octahedron gives x, y, z.
    """
    verts = _solid_vertices(solid)
    reps = []
    for v in verts:
        lead = v[np.flatnonzero(np.abs(v) > 1e-12)[0]]
        if lead > 0:
            reps.append(v)
    reps.sort(key=lambda v: tuple(-np.round(v, 12)))
    return [axis_measurement(v, f"{solid}-{i}") for i, v in enumerate(reps)]


def povm_bloch_vectors(povm):
    """Bloch vectors of the normalized effects of a qubit POVM."""
    if povm.dim != 2:
        raise DimensionError("Bloch vectors are defined for qubits only")
    rows = povm.rows
    return rows[:, 1:] / rows[:, :1]


def haar_random_projector(dim, rng):
    """Projector onto the first column of a Haar-random unitary."""
    from .priors import haar_unitary

    check_dim(dim)
    psi = haar_unitary(dim, rng)[:, 0]
    return projector_measurement(psi / np.linalg.norm(psi), "haar")


def born_probabilities(rho, povm):
    """Outcome probabilities ``Tr(M_i rho)``, clipped at zero and renormalized."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (povm.dim, povm.dim):
        raise DimensionError(f"state shape {rho.shape} does not match POVM dimension {povm.dim}")
    p = np.real(np.einsum("kij,ji->k", povm.effects, rho))
    p = np.clip(p, 0.0, None)
    return p / p.sum()


def sample_outcome(rho, povm, rng):
    """Draw one outcome index by inverting the CDF at a single uniform variate."""
    p = born_probabilities(rho, povm)
    return _inverse_cdf(p, rng.random())


def _inverse_cdf(p, u):
    idx = int(np.searchsorted(np.cumsum(p), u, side="right"))
    return min(idx, len(p) - 1)


def projector_rows(psis):
    """Probability coefficients for a batch of two-outcome projectors.

    Parameters
    ----------
    psis : ndarray, shape (c, d)
        Normalized states; candidate ``j`` is ``{|psi_j><psi_j|, 1 - ...}``.

    Returns
    -------
    ndarray, shape (c, d**2)
        Rows as in :attr:`Povm.rows` for outcome 0 of each candidate; the
        complementary outcome has coefficients ``[1 - r0, -r]``.
    """
    psis = np.asarray(psis, dtype=complex)
    d = psis.shape[1]
    basis = pauli_basis(d)
    out = np.empty((psis.shape[0], n_coords(d) + 1))
    out[:, 0] = 1.0 / d
    out[:, 1:] = np.real(np.einsum("ci,kij,cj->ck", psis.conj(), basis, psis)) / d
    return out
