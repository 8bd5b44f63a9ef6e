import math

import numpy as np
import pytest
from scipy.stats import poisson

from errors import ConsistencyError, InvalidDimensionError, InvalidParameterError, NumericError
from models.fock import DensityMatrix, FockOperator
from physics.fock_core import (
    coherent_state,
    displaced,
    displacement,
    embed,
    fock_state,
    ladder_operators,
    matrix_exp,
    parity,
    rotation,
    thermal_state,
)
from physics.observables import mean_phonons


class TestLadderOperators:
    def test_annihilation_lowers_fock_state(self):
        b, _, _ = ladder_operators(4)
        ket = np.zeros(4)
        ket[3] = 1.0
        result = b @ ket
        expected = np.zeros(4)
        expected[2] = math.sqrt(3)
        np.testing.assert_allclose(result, expected)

    def test_commutator_is_identity_away_from_edge(self):
        b, bdag, _ = ladder_operators(10)
        comm = (b @ bdag - bdag @ b).entries
        np.testing.assert_allclose(comm[:9, :9], np.eye(9), atol=1e-14)

    def test_number_operator_diagonal(self):
        _, _, n = ladder_operators(4)
        np.testing.assert_allclose(np.diag(n.entries), [0, 1, 2, 3])

    def test_rejects_single_level(self):
        with pytest.raises(InvalidDimensionError):
            ladder_operators(1)


class TestFockOperator:
    def test_adjoint_of_adjoint(self):
        rng = np.random.default_rng(3)
        op = FockOperator(5, rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5)))
        np.testing.assert_array_equal(op.adjoint().adjoint().entries, op.entries)

    def test_mixed_dimensions_rejected(self):
        with pytest.raises(InvalidDimensionError):
            FockOperator.identity(3) @ FockOperator.identity(4)

    def test_entries_are_read_only(self):
        op = FockOperator.identity(3)
        with pytest.raises(ValueError):
            op.entries[0, 0] = 2.0


class TestMatrixExp:
    def test_zero_gives_identity(self):
        np.testing.assert_allclose(matrix_exp(FockOperator(3, np.zeros((3, 3)))).entries, np.eye(3))

    def test_parity_phases(self):
        _, _, n = ladder_operators(4)
        result = matrix_exp(n.scaled(1j * math.pi))
        np.testing.assert_allclose(result.entries, np.diag([1, -1, 1, -1]), atol=1e-14)
        np.testing.assert_allclose(parity(4).entries, result.entries, atol=1e-14)

    def test_nilpotent(self):
        result = matrix_exp(FockOperator(2, [[0, 0.7], [0, 0]]))
        np.testing.assert_allclose(result.entries, [[1, 0.7], [0, 1]])

    def test_non_finite_input(self):
        with pytest.raises(NumericError):
            matrix_exp(FockOperator(2, [[np.nan, 0], [0, 0]]))


class TestDisplacement:
    def test_zero_amplitude_is_identity(self):
        np.testing.assert_allclose(displacement(0, 12).entries, np.eye(12), atol=1e-15)

    def test_small_coherent_mean(self):
        state = coherent_state(0.002, 26)
        assert mean_phonons(state) == pytest.approx(4e-6, rel=1e-9)

    @pytest.mark.parametrize("alpha", [0.3, 0.8 + 0.5j, -1.0, 1.1j])
    def test_inverse_on_interior_block(self, alpha):
        dim = 40
        product = displacement(alpha, dim).entries @ displacement(-alpha, dim).entries
        interior = 10
        np.testing.assert_allclose(product[:interior, :interior], np.eye(interior), atol=1e-10)

    def test_coherent_state_is_poissonian(self):
        alpha = 1.2
        state = coherent_state(alpha, 30)
        probs = np.real(np.diag(state.entries))
        expected = poisson.pmf(np.arange(30), alpha ** 2)
        np.testing.assert_allclose(probs, expected, atol=1e-12)

    def test_large_displacement_warns(self, caplog):
        with caplog.at_level("WARNING"):
            displacement(3.0, 10)
        assert "exceeds dim/4" in caplog.text


class TestStates:
    def test_vacuum(self):
        state = thermal_state(0.0, 6)
        assert state.entries[0, 0] == 1.0
        assert state.purity() == pytest.approx(1.0)

    def test_thermal_ground_population(self):
        state = thermal_state(0.1, 26)
        assert state.entries[0, 0].real == pytest.approx(1 / 1.1, abs=1e-12)
        assert abs(state.trace() - 1.0) < 1e-12

    def test_thermal_rejects_negative_occupancy(self):
        with pytest.raises(InvalidParameterError):
            thermal_state(-0.1, 6)

    def test_fock_state_outside_cutoff(self):
        with pytest.raises(InvalidParameterError):
            fock_state(6, 6)

    def test_rotation_leaves_populations(self):
        state = coherent_state(0.8, 20)
        rot = rotation(1.3, 20).entries
        turned = rot @ state.entries @ rot.conj().T
        np.testing.assert_allclose(np.diag(turned), np.diag(state.entries), atol=1e-14)

    def test_displaced_vacuum_matches_coherent(self):
        np.testing.assert_allclose(displaced(fock_state(0, 20), 0.5).entries,
                                   coherent_state(0.5, 20).entries, atol=1e-12)

    def test_embed_pads_with_zeros(self):
        big = embed(np.ones((2, 2)), 4)
        assert big.shape == (4, 4)
        assert big[3, 3] == 0
        with pytest.raises(InvalidDimensionError):
            embed(np.ones((5, 5)), 4)


class TestDensityMatrix:
    def test_from_matrix_normalizes(self):
        state = DensityMatrix.from_matrix(np.diag([2.0, 2.0]))
        np.testing.assert_allclose(state.entries, np.eye(2) / 2)
        assert state.satisfies_invariants()

    def test_non_hermitian_rejected(self):
        with pytest.raises(ConsistencyError):
            DensityMatrix.from_matrix([[0.5, 0.3], [0.0, 0.5]])

    def test_negative_state_rejected_when_strict(self):
        with pytest.raises(ConsistencyError):
            DensityMatrix.from_matrix(np.diag([1.2, -0.2]))
        relaxed = DensityMatrix.from_matrix(np.diag([1.2, -0.2]), strict=False)
        assert relaxed.min_eigenvalue() == pytest.approx(-0.2)

    def test_invariant_report(self):
        report = thermal_state(0.3, 12).invariant_report()
        assert report['trace_error'] < 1e-12
        assert report['hermitian_error'] == 0.0
        assert report['min_eigenvalue'] > 0
