import math

import numpy as np
import pytest

from errors import ConsistencyError, DomainError
from models.fock import DensityMatrix
from physics.fock_core import coherent_state, displaced, fock_state, thermal_state
from physics.observables import (
    g2_zero_numeric,
    mean_phonons,
    number_distribution,
    poisson_distance,
    poisson_distribution,
    square_grid,
    total_variation_distance,
    wigner,
)


def test_mean_of_vacuum_and_thermal():
    assert mean_phonons(fock_state(0, 10)) == 0.0
    assert mean_phonons(thermal_state(0.1, 26)) == pytest.approx(0.1, abs=1e-10)


def test_mean_rejects_imaginary_residue():
    # complex diagonal, only reachable by skipping from_matrix
    rho = DensityMatrix(2, np.diag([0.5, 0.5 + 1e-6j]))
    with pytest.raises(ConsistencyError):
        mean_phonons(rho)


class TestNumberDistribution:
    def test_fock_state(self):
        probs = number_distribution(fock_state(2, 6))
        np.testing.assert_array_equal(probs, [0, 0, 1, 0, 0, 0])

    def test_thermal_ratio(self):
        probs = number_distribution(thermal_state(0.1, 26))
        np.testing.assert_allclose(probs[1:6] / probs[:5], 1 / 11)
        assert probs.sum() == pytest.approx(1.0, abs=1e-10)

    def test_small_negative_entries_clamped(self):
        rho = DensityMatrix(3, np.diag([0.6, 0.4 + 1e-12, -1e-12]))
        probs = number_distribution(rho)
        assert probs.min() == 0.0


class TestG2:
    def test_single_phonon_antibunching(self):
        assert g2_zero_numeric(fock_state(1, 8)) == 0.0

    def test_thermal(self):
        assert g2_zero_numeric(thermal_state(0.1, 26)) == pytest.approx(2.0, abs=1e-6)

    def test_coherent(self):
        assert g2_zero_numeric(coherent_state(1.5, 40)) == pytest.approx(1.0, abs=1e-8)

    def test_vacuum_is_undefined(self):
        with pytest.raises(DomainError):
            g2_zero_numeric(fock_state(0, 8))


class TestPoissonMetrics:
    def test_distance_bounds(self):
        p = np.array([1.0, 0.0])
        assert total_variation_distance(p, p) == 0.0
        assert total_variation_distance(p, [0.0, 1.0]) == 1.0
        assert total_variation_distance([1.0], [0.5, 0.5]) == pytest.approx(0.5)

    def test_coherent_state_is_poissonian(self):
        assert poisson_distance(coherent_state(1.2, 30)) < 1e-10

    def test_thermal_state_is_not(self):
        assert poisson_distance(thermal_state(2.0, 60)) > 0.1

    def test_poisson_pmf(self):
        probs = poisson_distribution(2.0, 4)
        assert probs[0] == pytest.approx(math.exp(-2.0))
        assert probs[2] == pytest.approx(2 * math.exp(-2.0))


class TestWigner:
    def test_vacuum_origin(self):
        assert wigner(fock_state(0, 12), [0j])[0] == pytest.approx(2 / math.pi)

    @pytest.mark.parametrize("nbar0", [0.1, 0.5, 2.0])
    def test_thermal_origin(self, nbar0):
        value = wigner(thermal_state(nbar0, 60), [0j])[0]
        assert value == pytest.approx(2 / (math.pi * (2 * nbar0 + 1)), rel=1e-9)

    def test_single_phonon_is_negative_at_origin(self):
        assert wigner(fock_state(1, 12), [0j])[0] == pytest.approx(-2 / math.pi)

    def test_displacement_translates(self):
        rho = thermal_state(0.3, 30)
        shift = 0.6 + 0.3j
        moved = displaced(rho, shift)
        points = np.array([0j, 0.2 - 0.1j, -0.4 + 0.5j])
        np.testing.assert_allclose(wigner(moved, points + shift), wigner(rho, points), atol=1e-8)

    def test_normalization(self):
        grid = square_grid(2.5, 51, center=0.8 + 0j)
        step = grid[0, 1].real - grid[0, 0].real
        values = wigner(coherent_state(0.8, 20), grid)
        assert values.shape == grid.shape
        assert np.sum(values) * step ** 2 == pytest.approx(1.0, abs=0.01)

    def test_grid_layout(self):
        grid = square_grid(1.0, 3, center=1j)
        assert grid.shape == (3, 3)
        assert grid[0, 0] == -1.0 + 0j
        assert grid[2, 2] == 1.0 + 2j
