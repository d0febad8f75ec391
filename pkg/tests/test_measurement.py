import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adaptomo.errors import DimensionError, DomainError
from adaptomo.measurement import (
    PLATONIC_SOLIDS,
    MeasurementRecord,
    Povm,
    axis_measurement,
    born_probabilities,
    factorized_projector,
    haar_random_projector,
    mub6_measurements,
    pauli_product_measurements,
    platonic_measurements,
    povm_bloch_vectors,
    projector_measurement,
    projector_rows,
    sample_outcome,
    tetrahedron_povm,
    tetrahedron_vectors,
)
from adaptomo.states import bloch_from_density, coords_from_density, pure_density

from conftest import random_states


def assert_valid_povm(povm):
    e = povm.effects
    for effect in e:
        np.testing.assert_allclose(effect, effect.conj().T, atol=1e-12)
        assert np.linalg.eigvalsh(effect)[0] >= -1e-10
    np.testing.assert_allclose(e.sum(axis=0), np.eye(povm.dim), atol=1e-10)


def all_constructors():
    rng = np.random.default_rng(0)
    out = list(mub6_measurements()) + [tetrahedron_povm()] + pauli_product_measurements()
    for solid in PLATONIC_SOLIDS:
        out += platonic_measurements(solid)
    out += [haar_random_projector(d, rng) for d in (2, 4) for _ in range(5)]
    out += [factorized_projector([1, 0], np.array([1, 1j]) / np.sqrt(2))]
    out += [projector_measurement(np.array([0.6, 0.8j]))]
    out += [axis_measurement([0, 0.6, 0.8])]
    return out


class TestPovm:
    @pytest.mark.parametrize("povm", all_constructors(), ids=lambda p: p.label)
    def test_completeness_and_psd(self, povm):
        assert_valid_povm(povm)

    def test_rejects_incomplete(self):
        with pytest.raises(DomainError):
            Povm(np.array([np.diag([1.0, 0.0]), np.diag([0.0, 0.5])]))

    def test_rejects_negative(self):
        with pytest.raises(DomainError):
            Povm(np.array([np.diag([1.5, 0.0]), np.diag([-0.5, 1.0])]))

    def test_rejects_single_effect(self):
        with pytest.raises(DomainError):
            Povm(np.eye(2)[None])

    def test_rejects_unsupported_dimension(self):
        with pytest.raises(DimensionError):
            Povm(np.array([np.eye(3), np.zeros((3, 3))]))

    def test_rows_reproduce_born_rule(self):
        for rho in random_states("hs_uniform", 4, 5, seed=1):
            for povm in pauli_product_measurements()[:3]:
                p = povm.rows[:, 0] + povm.rows[:, 1:] @ coords_from_density(rho)
                np.testing.assert_allclose(p, born_probabilities(rho, povm), atol=1e-12)

    def test_record_range(self):
        with pytest.raises(DomainError):
            MeasurementRecord(mub6_measurements()[0], 2)


class TestMub6:
    def test_z_measurement(self):
        z = mub6_measurements()[2]
        np.testing.assert_allclose(z.effects[0], np.diag([1, 0]))
        np.testing.assert_allclose(z.effects[1], np.diag([0, 1]))

    def test_maximally_mixed(self):
        for m in mub6_measurements():
            np.testing.assert_allclose(born_probabilities(np.eye(2) / 2, m), [0.5, 0.5])

    def test_bloch_vectors(self):
        vecs = [bloch_from_density(e) for m in mub6_measurements() for e in m.effects]
        expected = [s * v for v in np.eye(3) for s in (1, -1)]
        np.testing.assert_allclose(vecs, expected, atol=1e-15)

    def test_mutually_unbiased(self):
        states = [e for m in mub6_measurements() for e in m.effects]
        for i, a in enumerate(states):
            for j, b in enumerate(states):
                if i // 2 != j // 2:
                    assert np.real(np.trace(a @ b)) == pytest.approx(0.5)


class TestTetrahedron:
    def test_sums_to_identity(self):
        np.testing.assert_allclose(tetrahedron_povm().effects.sum(axis=0), np.eye(2), atol=1e-15)

    def test_gram(self):
        a = povm_bloch_vectors(tetrahedron_povm())
        np.testing.assert_allclose(a @ a.T, 4 / 3 * np.eye(4) - 1 / 3, atol=1e-12)
        np.testing.assert_allclose(a, tetrahedron_vectors(), atol=1e-12)

    def test_uniform_on_mixed(self):
        np.testing.assert_allclose(born_probabilities(np.eye(2) / 2, tetrahedron_povm()), 0.25)

    def test_rotated(self):
        theta = 0.7
        rot = np.array([[np.cos(theta), -np.sin(theta), 0], [np.sin(theta), np.cos(theta), 0], [0, 0, 1]])
        a = povm_bloch_vectors(tetrahedron_povm(rot))
        np.testing.assert_allclose(a @ a.T, 4 / 3 * np.eye(4) - 1 / 3, atol=1e-12)


class TestProjectors:
    def test_ket_zero(self):
        m = projector_measurement([1, 0])
        np.testing.assert_allclose(m.effects, [np.diag([1, 0]), np.diag([0, 1])])

    def test_certain_outcome(self):
        psi = np.array([0.6, 0.8j])
        assert born_probabilities(pure_density(psi), projector_measurement(psi))[0] == pytest.approx(1)

    def test_complement_rank_in_two_qubits(self):
        psi = np.array([1, 1j, 0, 1]) / np.sqrt(3)
        assert np.linalg.matrix_rank(projector_measurement(psi).effects[1], tol=1e-10) == 3

    def test_unnormalized(self):
        with pytest.raises(DomainError):
            projector_measurement([1, 1])
        with pytest.raises(DomainError):
            factorized_projector([1, 1], [1, 0])

    def test_factorized_ket_zero(self):
        m = factorized_projector([1, 0], [1, 0])
        np.testing.assert_allclose(m.effects[0], np.diag([1, 0, 0, 0]))

    def test_factorized_on_bell(self):
        bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
        p = born_probabilities(pure_density(bell), factorized_projector([1, 0], [1, 0]))
        np.testing.assert_allclose(p, [0.5, 0.5])

    def test_factorized_marginal_consistency(self):
        rng = np.random.default_rng(2)
        rho = random_states("bures_uniform", 4, 1, seed=3)[0]
        a = rng.normal(size=2) + 1j * rng.normal(size=2)
        b = rng.normal(size=2) + 1j * rng.normal(size=2)
        a, b = a / np.linalg.norm(a), b / np.linalg.norm(b)
        pa, pb = pure_density(a), pure_density(b)
        # brute force: Tr[(PA x PB) rho] as an explicit index sum
        r = rho.reshape(2, 2, 2, 2)
        direct = np.real(np.einsum("ij,kl,jlik->", pa, pb, r))
        assert born_probabilities(rho, factorized_projector(a, b))[0] == pytest.approx(direct, abs=1e-12)

    def test_projector_rows_match_povm_rows(self):
        rng = np.random.default_rng(4)
        psis = rng.normal(size=(6, 4)) + 1j * rng.normal(size=(6, 4))
        psis /= np.linalg.norm(psis, axis=1, keepdims=True)
        rows = projector_rows(psis)
        for psi, row in zip(psis, rows):
            np.testing.assert_allclose(row, projector_measurement(psi).rows[0], atol=1e-14)


class TestPlatonic:
    def test_octahedron_is_mub6(self):
        octa = {tuple(np.round(povm_bloch_vectors(m)[0], 12)) for m in platonic_measurements("octahedron")}
        mub = {tuple(np.round(povm_bloch_vectors(m)[0], 12)) for m in mub6_measurements()}
        assert octa == mub

    @pytest.mark.parametrize("solid,count", [("octahedron", 3), ("cube", 4), ("icosahedron", 6), ("dodecahedron", 10)])
    def test_counts_and_unit_vectors(self, solid, count):
        ms = platonic_measurements(solid)
        assert len(ms) == count
        for m in ms:
            v = povm_bloch_vectors(m)
            np.testing.assert_allclose(np.linalg.norm(v, axis=1), 1, atol=1e-12)
            np.testing.assert_allclose(v[0], -v[1], atol=1e-12)

    def test_unknown_solid(self):
        with pytest.raises(DomainError):
            platonic_measurements("torus")


class TestHaarProjector:
    @pytest.mark.parametrize("dim", [2, 4])
    def test_mean_overlap(self, dim):
        rng = np.random.default_rng(5)
        rho = pure_density(np.eye(dim)[0])
        p = np.array([born_probabilities(rho, haar_random_projector(dim, rng))[0] for _ in range(4000)])
        assert abs(p.mean() - 1 / dim) < 3 * p.std() / np.sqrt(len(p))

    def test_reproducible(self):
        a = haar_random_projector(4, np.random.default_rng(6))
        b = haar_random_projector(4, np.random.default_rng(6))
        np.testing.assert_array_equal(a.effects, b.effects)


class TestSampling:
    def test_born_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            born_probabilities(np.eye(4) / 4, tetrahedron_povm())

    def test_certain_zero(self):
        z = mub6_measurements()[2]
        np.testing.assert_allclose(born_probabilities(np.diag([1, 0]), z), [1, 0])
        rng = np.random.default_rng(7)
        assert all(sample_outcome(np.diag([1, 0]), z, rng) == 0 for _ in range(1000))

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=25)
    def test_born_matches_trace(self, seed):
        rho = random_states("hs_uniform", 2, 1, seed)[0]
        povm = tetrahedron_povm()
        direct = [np.real(np.trace(e @ rho)) for e in povm.effects]
        np.testing.assert_allclose(born_probabilities(rho, povm), direct, atol=1e-12)

    def test_frequencies(self):
        rng = np.random.default_rng(8)
        rho = random_states("bures_uniform", 2, 1, seed=9)[0]
        povm = tetrahedron_povm()
        p = born_probabilities(rho, povm)
        n = 100_000
        counts = np.bincount([sample_outcome(rho, povm, rng) for _ in range(n)], minlength=4)
        sigma = np.sqrt(n * p * (1 - p))
        assert np.all(np.abs(counts - n * p) < 4 * sigma)

    def test_seeded_sequence(self):
        rho = np.eye(2) / 2
        m = mub6_measurements()[0]
        r1, r2 = np.random.default_rng(11), np.random.default_rng(11)
        assert [sample_outcome(rho, m, r1) for _ in range(50)] == [sample_outcome(rho, m, r2) for _ in range(50)]
