import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from adaptomo.errors import DimensionError, DomainError
from adaptomo.states import (
    bloch_from_density,
    bures_angle,
    bures_distance,
    coords_from_density,
    density_from_bloch,
    density_from_coords,
    eigendecompose,
    fidelity,
    hs_distance,
    is_physical,
    project_coords,
    project_to_physical,
    pure_density,
    purity,
    qubit_fidelity,
    relative_entropy,
    tensor,
    trace_distance,
    validate_density,
)

from conftest import random_states

ZERO = np.diag([1.0, 0.0]).astype(complex)
ONE = np.diag([0.0, 1.0]).astype(complex)
MIXED = np.eye(2) / 2


def _fidelity_oracle(a, b):
    # independent path through scipy's general matrix square root
    ra = scipy.linalg.sqrtm(a)
    return float(np.real(np.trace(scipy.linalg.sqrtm(ra @ b @ ra))) ** 2)


def _ball(draw_vec):
    v = np.array(draw_vec, dtype=float)
    n = np.linalg.norm(v)
    return v / n * min(n, 1.0) if n > 1 else v


vectors = st.lists(st.floats(-1, 1, allow_nan=False), min_size=3, max_size=3).map(_ball)


class TestBloch:
    def test_zero_vector_is_maximally_mixed(self):
        np.testing.assert_allclose(density_from_bloch([0, 0, 0]), MIXED, atol=1e-15)

    def test_pole(self):
        np.testing.assert_allclose(density_from_bloch([0, 0, 1]), ZERO, atol=1e-15)

    @given(vectors)
    def test_round_trip(self, v):
        np.testing.assert_allclose(bloch_from_density(density_from_bloch(v)), v, atol=1e-12)

    def test_inverse_examples(self):
        np.testing.assert_allclose(bloch_from_density(MIXED), 0, atol=1e-15)
        np.testing.assert_allclose(bloch_from_density(ZERO), [0, 0, 1], atol=1e-15)
        rho = (np.eye(2) + 0.6 * np.array([[0, 1], [1, 0]])) / 2
        np.testing.assert_allclose(bloch_from_density(rho), [0.6, 0, 0], atol=1e-15)

    def test_qubit_only(self):
        with pytest.raises(DimensionError):
            bloch_from_density(np.eye(4) / 4)

    def test_generalized_coords_round_trip_two_qubits(self):
        rho = random_states("hs_uniform", 4, 5, seed=1)
        np.testing.assert_allclose(density_from_coords(coords_from_density(rho), 4), rho, atol=1e-13)


class TestValidation:
    def test_accepts_physical(self):
        validate_density(random_states("bures_uniform", 4, 1, seed=2)[0])

    @pytest.mark.parametrize(
        "bad",
        [np.diag([1.2, -0.2]), np.array([[0.5, 0.1], [0.3, 0.5]]), np.diag([0.6, 0.6])],
        ids=["negative", "non-hermitian", "trace"],
    )
    def test_rejects(self, bad):
        assert not is_physical(bad)
        with pytest.raises(DomainError):
            validate_density(bad)


class TestFidelity:
    def test_self(self):
        for rho in random_states("bures_uniform", 4, 5, seed=3):
            assert fidelity(rho, rho) == pytest.approx(1.0, abs=1e-10)

    def test_orthogonal(self):
        assert fidelity(ZERO, ONE) == pytest.approx(0.0, abs=1e-14)

    @pytest.mark.parametrize("eps", [1e-3, 0.01, 0.2])
    def test_shell_infidelity_is_half_eps(self, eps):
        rho = density_from_bloch([0, 0, 1])
        close = density_from_bloch([0, 0, 1 - eps])
        assert 1 - fidelity(rho, close) == pytest.approx(eps / 2, rel=1e-9)

    def test_closed_form_matches_general(self):
        rng = np.random.default_rng(4)
        states = random_states("bures_uniform", 2, 400, seed=5)
        for a, b in zip(states[::2], states[1::2]):
            sa, sb = bloch_from_density(a), bloch_from_density(b)
            assert abs(fidelity(a, b) - qubit_fidelity(sa, sb)) < 1e-10
        # float unit vectors sit ~1e-16 inside the sphere and sqrt(1 - |s|^2)
        # turns that into a 1e-8 term, so pure inputs get a looser tolerance
        for _ in range(50):
            u = rng.normal(size=3)
            u /= np.linalg.norm(u)
            sb = bloch_from_density(states[0])
            assert abs(fidelity(density_from_bloch(u), states[0]) - qubit_fidelity(u, sb)) < 1e-7

    def test_against_scipy_sqrtm(self):
        states = random_states("hs_uniform", 4, 20, seed=6)
        for a, b in zip(states[::2], states[1::2]):
            assert fidelity(a, b) == pytest.approx(_fidelity_oracle(a, b), abs=1e-9)

    def test_symmetric(self):
        a, b = random_states("bures_uniform", 4, 2, seed=7)
        assert fidelity(a, b) == pytest.approx(fidelity(b, a), abs=1e-12)

    def test_rejects_non_psd(self):
        with pytest.raises(DomainError):
            fidelity(np.diag([1.5, -0.5]), MIXED)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            fidelity(MIXED, np.eye(4) / 4)


class TestDistances:
    def test_identical(self):
        rho = random_states("bures_uniform", 2, 1, seed=8)[0]
        assert bures_distance(rho, rho) == pytest.approx(0, abs=1e-7)
        assert trace_distance(rho, rho) == pytest.approx(0, abs=1e-15)
        assert hs_distance(rho, rho) == pytest.approx(0, abs=1e-15)
        assert relative_entropy(rho, rho) == pytest.approx(0, abs=1e-12)

    def test_orthogonal(self):
        assert bures_distance(ZERO, ONE) == pytest.approx(np.sqrt(2))
        assert bures_angle(ZERO, ONE) == pytest.approx(np.pi / 2)

    def test_bures_series(self):
        rho = density_from_bloch([0.3, 0.2, 0.1])
        # tune the second state until 1 - F = 1e-4
        direction = np.array([0.0, 0.0, 1.0])
        lo, hi = 0.0, 0.1
        for _ in range(200):
            mid = (lo + hi) / 2
            f = fidelity(rho, density_from_bloch([0.3, 0.2, 0.1] + mid * direction))
            lo, hi = (mid, hi) if 1 - f < 1e-4 else (lo, mid)
        other = density_from_bloch([0.3, 0.2, 0.1] + lo * direction)
        inf = 1 - fidelity(rho, other)
        assert inf == pytest.approx(1e-4, rel=1e-6)
        assert abs(bures_distance(rho, other) ** 2 - inf) / inf < 0.01

    def test_qubit_trace_distance(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            u, v = (_ball(rng.uniform(-1, 1, 3)) for _ in range(2))
            expected = np.linalg.norm(u - v) / 2
            assert trace_distance(density_from_bloch(u), density_from_bloch(v)) == pytest.approx(expected, abs=1e-12)

    def test_relative_entropy_example(self):
        assert relative_entropy(ZERO, MIXED) == pytest.approx(np.log(2), abs=1e-12)

    def test_relative_entropy_support(self):
        assert relative_entropy(MIXED, ZERO) == np.inf

    def test_hs_is_squared_frobenius(self):
        a, b = random_states("hs_uniform", 4, 2, seed=10)
        assert hs_distance(a, b) == pytest.approx(np.linalg.norm(a - b) ** 2, abs=1e-14)


def _triples(seed, n=1000):
    rng = np.random.default_rng(seed)
    kinds = ("bures_uniform", "hs_uniform", "haar_pure")
    for i in range(n):
        kind = kinds[i % 3]
        yield random_states(kind, 2 if i % 2 else 4, 3, seed=int(rng.integers(2**32)))


class TestDistanceAxioms:
    """Metric axioms on 10^3 random triples of mixed and pure states."""

    @pytest.mark.parametrize(
        "dist,tol",
        [(trace_distance, 1e-12), (bures_distance, 1e-7), (bures_angle, 1e-7)],
        ids=["trace", "bures", "angle"],
    )
    def test_metric(self, dist, tol):
        for a, b, c in _triples(11):
            ab, bc, ac = dist(a, b), dist(b, c), dist(a, c)
            assert ab >= 0 and ac >= 0
            assert ab == pytest.approx(dist(b, a), abs=tol)
            assert ac <= ab + bc + tol
            assert dist(a, a) <= tol

    def test_ranges(self):
        for a, b, c in _triples(12):
            assert 0 <= fidelity(a, b) <= 1
            assert 0 <= trace_distance(a, c) <= 1
            assert 0 <= bures_distance(b, c) <= np.sqrt(2)
            assert hs_distance(a, b) >= 0
            assert relative_entropy(a, b) >= 0

    def test_fuchs_van_de_graaf(self):
        for a, b, _ in _triples(13, n=300):
            f, t = fidelity(a, b), trace_distance(a, b)
            assert 1 - np.sqrt(f) <= t + 1e-9
            assert t <= np.sqrt(1 - f) + 1e-9


class TestHelpers:
    def test_tensor(self):
        np.testing.assert_allclose(tensor(MIXED, MIXED), np.eye(4) / 4)

    def test_purity(self):
        assert purity(pure_density(np.array([1, 1j]) / np.sqrt(2))) == pytest.approx(1)
        assert purity(np.eye(4) / 4) == pytest.approx(1 / 4)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=30)
    def test_purity_range_and_eig_order(self, seed):
        rho = random_states("hs_uniform", 4, 1, seed)[0]
        assert 1 / 4 - 1e-12 <= purity(rho) <= 1 + 1e-12
        evals, evecs = eigendecompose(rho)
        assert np.all(np.diff(evals) <= 1e-15)
        np.testing.assert_allclose((evecs * evals) @ evecs.conj().T, rho, atol=1e-12)


class TestProjection:
    def test_fixed_point(self):
        for rho in random_states("bures_uniform", 4, 5, seed=14):
            np.testing.assert_allclose(project_to_physical(rho), rho, atol=1e-12)

    def test_eigenvalue_truncation(self):
        np.testing.assert_allclose(project_to_physical(np.diag([1.2, -0.2])), np.diag([1.0, 0.0]), atol=1e-15)

    def test_long_bloch_vector(self):
        v = np.array([0.9, -0.6, 0.9])
        v *= 1.5 / np.linalg.norm(v)
        out = bloch_from_density(project_to_physical(density_from_bloch(v)))
        np.testing.assert_allclose(out, v / 1.5, atol=1e-12)

    def test_coords_agree_with_matrix_projection(self):
        rng = np.random.default_rng(15)
        x = rng.normal(scale=0.4, size=(20, 15))
        fast = project_coords(x, 4)
        for xi, fi in zip(x, fast):
            slow = project_to_physical(density_from_coords(xi, 4))
            np.testing.assert_allclose(density_from_coords(fi, 4), slow, atol=1e-12)

    def test_is_nearest(self):
        # the projection beats random physical competitors in Frobenius norm
        rng = np.random.default_rng(16)
        m = density_from_coords(rng.normal(scale=0.5, size=15), 4)
        best = np.linalg.norm(m - project_to_physical(m))
        for rho in random_states("hs_uniform", 4, 200, seed=17):
            assert np.linalg.norm(m - rho) >= best - 1e-12
