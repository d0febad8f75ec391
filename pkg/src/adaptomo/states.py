"""State algebra, generalized Bloch coordinates and distances between states.

Density matrices are plain ``numpy`` arrays of shape ``(d, d)``; pure states
are 1-D amplitude arrays and Bloch vectors are length-3 real arrays. Every
state of dimension ``d`` is also described by its generalized Bloch
coordinates ``x`` (length ``d**2 - 1``) in the Pauli-string basis::

    rho = (I + sum_k x_k P_k) / d,      x_k = Tr(rho P_k)

For a qubit these are the usual Stokes parameters.
"""

from functools import lru_cache
from itertools import product

import numpy as np

from .errors import DimensionError, DomainError

SUPPORTED_DIMS = (2, 4)

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
EIG_CLAMP = 1e-14

IDENTITY2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)


def check_dim(dim):
    if dim not in SUPPORTED_DIMS:
        raise DimensionError(f"dimension must be one of {SUPPORTED_DIMS}, got {dim}")
    return dim


@lru_cache(maxsize=None)
def pauli_basis(dim):
    """Traceless Pauli strings spanning the Hermitian matrices of size ``dim``.

    Returns a read-only array of shape ``(dim**2 - 1, dim, dim)``. For two
    qubits the ordering is ``P_a (x) P_b`` with ``(a, b)`` in lexicographic
    order over ``I, X, Y, Z`` and ``II`` dropped.
    """
    n_qubits = int(round(np.log2(dim)))
    if 2**n_qubits != dim:
        raise DimensionError(f"dimension {dim} is not a power of two")
    singles = (IDENTITY2,) + PAULIS
    basis = []
    for labels in product(range(4), repeat=n_qubits):
        if not any(labels):
            continue
        op = np.array([[1.0 + 0j]])
        for a in labels:
            op = np.kron(op, singles[a])
        basis.append(op)
    basis = np.array(basis)
    basis.setflags(write=False)
    return basis


def n_coords(dim):
    return dim * dim - 1


def coords_from_density(rho):
    """Generalized Bloch coordinates ``x_k = Tr(rho P_k)`` of any state."""
    rho = np.asarray(rho, dtype=complex)
    basis = pauli_basis(rho.shape[-1])
    # Tr(rho P) = sum_ij rho_ij P_ji
    return np.real(np.einsum("...ij,kji->...k", rho, basis))


def density_from_coords(x, dim=None):
    """Inverse of :func:`coords_from_density`; accepts a stack of vectors."""
    x = np.asarray(x, dtype=float)
    if dim is None:
        dim = int(round(np.sqrt(x.shape[-1] + 1)))
    basis = pauli_basis(dim)
    rho = np.tensordot(x, basis, axes=([-1], [0]))
    rho = rho + np.eye(dim)
    return rho / dim


def density_from_bloch(v):
    """Qubit density matrix ``(I + v . sigma) / 2``.

    Vectors longer than one are accepted and give a non-positive matrix;
    checking physicality is left to the caller.
    """
    v = np.asarray(v, dtype=float)
    if v.shape != (3,):
        raise DimensionError(f"Bloch vector must have 3 components, got shape {v.shape}")
    return density_from_coords(v, 2)


def bloch_from_density(rho):
    """Bloch vector ``v_i = Tr(rho sigma_i)`` of a qubit state."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise DimensionError(f"Bloch vectors are defined for qubits only, got shape {rho.shape}")
    return coords_from_density(rho)


def pure_density(psi):
    """Projector ``|psi><psi|`` for a (normalized) amplitude vector."""
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def normalize(psi):
    psi = np.asarray(psi, dtype=complex)
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise DomainError("cannot normalize the zero vector")
    return psi / norm


def is_normalized(psi, tol=HERMITIAN_TOL):
    return abs(np.vdot(psi, psi).real - 1.0) <= tol


def validate_density(rho, *, name="rho"):
    """Return ``rho`` as a complex array after checking the state invariants.

    Raises
    ------
    DimensionError
        If ``rho`` is not square or its dimension is not 2 or 4.
    DomainError
        If ``rho`` is not Hermitian, not unit-trace or not PSD (with the
        package tolerances).
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionError(f"{name} must be a square matrix, got shape {rho.shape}")
    check_dim(rho.shape[0])
    if np.max(np.abs(rho - rho.conj().T)) > HERMITIAN_TOL:
        raise DomainError(f"{name} is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > TRACE_TOL:
        raise DomainError(f"{name} does not have unit trace")
    if np.linalg.eigvalsh(rho)[0] < -PSD_TOL:
        raise DomainError(f"{name} is not positive semidefinite")
    return rho


def is_physical(rho):
    try:
        validate_density(rho)
    except (DomainError, DimensionError):
        return False
    return True


def _same_dim(rho1, rho2):
    if rho1.shape != rho2.shape:
        raise DimensionError(f"dimension mismatch: {rho1.shape} vs {rho2.shape}")


def _psd_parts(rho, name):
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionError(f"{name} must be a square matrix, got shape {rho.shape}")
    check_dim(rho.shape[0])
    evals, evecs = np.linalg.eigh((rho + rho.conj().T) / 2)
    if evals[0] < -PSD_TOL:
        raise DomainError(f"{name} is not positive semidefinite (min eigenvalue {evals[0]:.3g})")
    # eigenvalues at round-off level are zeros; keeping them would add
    # sqrt(1e-16)-sized spurious terms to matrix square roots
    return np.where(evals > EIG_CLAMP, evals, 0.0), evecs


def _sqrtm_psd(rho, name):
    evals, evecs = _psd_parts(rho, name)
    return (evecs * np.sqrt(evals)) @ evecs.conj().T


def fidelity(rho1, rho2):
    """Uhlmann fidelity ``[Tr sqrt(sqrt(rho1) rho2 sqrt(rho1))]**2``, clipped to [0, 1].

    Evaluated as the squared nuclear norm of ``sqrt(rho1) sqrt(rho2)``; the
    singular values carry round-off of order 1e-16, where eigenvalues of the
    inner product would carry its square root.
    """
    rho1 = np.asarray(rho1, dtype=complex)
    rho2 = np.asarray(rho2, dtype=complex)
    _same_dim(rho1, rho2)
    product = _sqrtm_psd(rho1, "rho1") @ _sqrtm_psd(rho2, "rho2")
    value = np.sum(np.linalg.svd(product, compute_uv=False)) ** 2
    return float(np.clip(value, 0.0, 1.0))


def qubit_fidelity(s1, s2):
    """Closed-form qubit fidelity from Bloch vectors.

    ``F = (1 + s1.s2 + sqrt(1 - |s1|^2) sqrt(1 - |s2|^2)) / 2``, i.e. half of
    one plus the Euclidean product of the four-vectors
    ``(sqrt(1 - |s|^2), s)``.
    """
    s1 = np.asarray(s1, dtype=float)
    s2 = np.asarray(s2, dtype=float)
    r1 = np.sqrt(np.clip(1.0 - s1 @ s1, 0.0, None))
    r2 = np.sqrt(np.clip(1.0 - s2 @ s2, 0.0, None))
    return float(np.clip(0.5 * (1.0 + s1 @ s2 + r1 * r2), 0.0, 1.0))


def bures_distance(rho1, rho2):
    """Bures distance ``sqrt(2 - 2 sqrt(F))`` in ``[0, sqrt(2)]``."""
    f = fidelity(rho1, rho2)
    return float(np.sqrt(max(2.0 - 2.0 * np.sqrt(f), 0.0)))


def bures_angle(rho1, rho2):
    """Bures angle ``arccos sqrt(F)`` in ``[0, pi/2]``."""
    return float(np.arccos(np.sqrt(fidelity(rho1, rho2))))


def trace_distance(rho1, rho2):
    rho1 = np.asarray(rho1, dtype=complex)
    rho2 = np.asarray(rho2, dtype=complex)
    _same_dim(rho1, rho2)
    _psd_parts(rho1, "rho1")
    _psd_parts(rho2, "rho2")
    diff = rho1 - rho2
    evals = np.linalg.eigvalsh((diff + diff.conj().T) / 2)
    return float(0.5 * np.sum(np.abs(evals)))


def hs_distance(rho1, rho2):
    """Hilbert-Schmidt distance ``Tr[(rho1 - rho2)^2]`` (not square-rooted)."""
    rho1 = np.asarray(rho1, dtype=complex)
    rho2 = np.asarray(rho2, dtype=complex)
    _same_dim(rho1, rho2)
    _psd_parts(rho1, "rho1")
    _psd_parts(rho2, "rho2")
    diff = rho1 - rho2
    return float(np.real(np.trace(diff @ diff)))


def relative_entropy(rho1, rho2, support_tol=1e-12):
    """Quantum relative entropy ``Tr[rho1 (log rho1 - log rho2)]`` in nats.

    Returns ``inf`` when the support of ``rho1`` is not contained in the
    support of ``rho2``.
    """
    rho1 = np.asarray(rho1, dtype=complex)
    rho2 = np.asarray(rho2, dtype=complex)
    _same_dim(rho1, rho2)
    p, _ = _psd_parts(rho1, "rho1")
    _psd_parts(rho2, "rho2")
    q, vecs = np.linalg.eigh((rho2 + rho2.conj().T) / 2)
    # weight of rho1 along each eigenvector of rho2
    overlap = np.real(np.einsum("ij,ik,kj->j", vecs.conj(), rho1, vecs))
    kernel = q <= support_tol
    if np.any(overlap[kernel] > support_tol):
        return float("inf")
    p = p[p > EIG_CLAMP]
    neg_entropy = np.sum(p * np.log(p))
    cross = np.sum(overlap[~kernel] * np.log(q[~kernel]))
    return float(max(neg_entropy - cross, 0.0))


def tensor(rho_a, rho_b):
    return np.kron(np.asarray(rho_a, dtype=complex), np.asarray(rho_b, dtype=complex))


def purity(rho):
    rho = np.asarray(rho, dtype=complex)
    return float(np.real(np.trace(rho @ rho)))


def eigendecompose(rho):
    """Eigenvalues in descending order with matching eigenvector columns."""
    rho = np.asarray(rho, dtype=complex)
    evals, evecs = np.linalg.eigh((rho + rho.conj().T) / 2)
    return evals[::-1], evecs[:, ::-1]


def project_simplex(values):
    """Euclidean projection of each row of ``values`` onto the probability simplex."""
    values = np.atleast_2d(np.asarray(values, dtype=float))
    u = -np.sort(-values, axis=-1)
    cssv = np.cumsum(u, axis=-1) - 1.0
    ind = np.arange(1, values.shape[-1] + 1)
    cond = u - cssv / ind > 0
    last = values.shape[-1] - 1 - np.argmax(cond[..., ::-1], axis=-1)
    theta = np.take_along_axis(cssv, last[..., None], axis=-1) / (last[..., None] + 1)
    return np.clip(values - theta, 0.0, None)


def project_to_physical(m):
    """Closest unit-trace PSD matrix to a Hermitian ``m`` in Frobenius norm.

    The eigenvalues are projected onto the probability simplex (shift, clip
    at zero, which also fixes the trace); eigenvectors are kept.
    """
    m = np.asarray(m, dtype=complex)
    m = (m + m.conj().T) / 2
    evals, evecs = np.linalg.eigh(m)
    if evals[0] >= 0 and abs(evals.sum() - 1.0) <= TRACE_TOL:
        return m
    lam = project_simplex(evals)[0]
    return (evecs * lam) @ evecs.conj().T


def project_coords(x, dim):
    """Vectorized :func:`project_to_physical` acting on coordinate rows.

    Rows that already describe PSD states are returned unchanged.
    """
    x = np.array(x, dtype=float, copy=True)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    if dim == 2:
        r = np.linalg.norm(x, axis=1)
        out = r > 1.0
        x[out] /= r[out, None]
    else:
        rho = density_from_coords(x, dim)
        evals, evecs = np.linalg.eigh(rho)
        bad = evals[:, 0] < 0
        if np.any(bad):
            lam = project_simplex(evals[bad])
            fixed = np.einsum("nij,nj,nkj->nik", evecs[bad], lam, evecs[bad].conj())
            x[bad] = coords_from_density(fixed)
    return x[0] if single else x


def fidelities_to(rho, x, dim):
    """Fidelity between ``rho`` and each state given by coordinate rows ``x``."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    rho = np.asarray(rho, dtype=complex)
    if dim == 2:
        s = coords_from_density(rho)
        r = np.sqrt(np.clip(1.0 - s @ s, 0.0, None))
        rr = np.sqrt(np.clip(1.0 - np.sum(x**2, axis=1), 0.0, None))
        return np.clip(0.5 * (1.0 + x @ s + r * rr), 0.0, 1.0)
    root = _sqrtm_psd(rho, "rho")
    inner = root @ density_from_coords(x, dim) @ root
    evals = np.linalg.eigvalsh(inner)
    return np.clip(np.sum(np.sqrt(np.clip(evals, 0.0, None)), axis=1) ** 2, 0.0, 1.0)


def min_eigenvalues(x, dim):
    """Smallest eigenvalue of the state behind each coordinate row."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if dim == 2:
        return (1.0 - np.linalg.norm(x, axis=1)) / 2
    return np.linalg.eigvalsh(density_from_coords(x, dim))[:, 0]
