import math

import numpy as np
import pytest

from errors import InvalidParameterError, UnsupportedChannelError
from models.channel import ChannelMode, FailureWeighting, GainChannel
from models.config import MaserConfig
from models.solution import ClosedFormSolution
from models.spin import SpinVector
from physics.closed_form import g2_analytic
from physics.dynamics import config_kernel
from physics.fock_core import coherent_state, thermal_state
from physics.gain_channels import gain_map
from physics.oracle import (
    POWER_SWITCH,
    condition_on_spin,
    fokker_planck_residual,
    g2_series_oracle,
    joint_evolution_oracle,
    joint_hamiltonian,
    pump_map_power,
)

FIG2 = dict(lam=0.001, kappa=1e-5, nbar0=0.1, r=1.0 / (41 * math.pi))


def heralded_config(dim=12, pump_p=0.0, lam=0.01, pre=None, post=None):
    channel = GainChannel(ChannelMode.HERALDED, pre or SpinVector.plus(), post or SpinVector.down(), math.pi, lam)
    return MaserConfig(channel, kappa=1e-4, nbar0=0.1, delta_t=41 * math.pi, pump_p=pump_p, cutoff=dim)


class TestJointEvolution:
    def test_hamiltonian_is_hermitian(self):
        h = joint_hamiltonian(0.05, 6)
        assert h.shape == (12, 12)
        np.testing.assert_allclose(h, h.conj().T)

    @pytest.mark.parametrize("lam", [0.001, 0.01, 0.06])
    @pytest.mark.parametrize("tau", [math.pi / 2, math.pi, 3 * math.pi / 2])
    def test_heralded_state_matches_gain_map(self, lam, tau):
        rho = thermal_state(0.1, 24)
        pre = SpinVector.from_amplitudes(0.4, 0.6)
        post = SpinVector.from_amplitudes(0.9, -0.1)
        joint = joint_evolution_oracle(pre, tau, lam, rho)
        assert joint.dim == 48
        slow = condition_on_spin(joint, post.projector())
        fast, _ = gain_map(GainChannel(ChannelMode.HERALDED, pre, post, tau, lam), rho)
        np.testing.assert_allclose(fast.entries, slow.entries, atol=1e-8)

    def test_partial_trace_matches_trace_channel(self):
        rho = coherent_state(0.5, 24)
        joint = joint_evolution_oracle(SpinVector.plus(), math.pi, 0.06, rho)
        slow = condition_on_spin(joint, np.eye(2))
        fast, _ = gain_map(GainChannel(ChannelMode.TRACE, SpinVector.plus(), None, math.pi, 0.06), rho)
        np.testing.assert_allclose(fast.entries, slow.entries, atol=1e-8)

    def test_zero_coupling_is_free_rotation(self):
        rho = coherent_state(0.5, 20)
        joint = joint_evolution_oracle(SpinVector.plus(), 1.3, 0.0, rho)
        rot = np.diag(np.exp(-1.3j * np.arange(20)))
        out = condition_on_spin(joint, np.eye(2))
        np.testing.assert_allclose(out.entries, rot @ rho.entries @ rot.conj().T, atol=1e-10)

    def test_full_period_returns_initial_state(self):
        rho = coherent_state(0.5, 20)
        joint = joint_evolution_oracle(SpinVector.plus(), 2 * math.pi, 0.06, rho)
        np.testing.assert_allclose(condition_on_spin(joint, np.eye(2)).entries, rho.entries, atol=1e-10)

    def test_dimension_cap(self):
        with pytest.raises(InvalidParameterError):
            joint_evolution_oracle(SpinVector.plus(), math.pi, 0.01, thermal_state(0.1, 65))


class TestPumpMapPower:
    def test_full_pump_is_repeated_gain(self):
        config = heralded_config(pump_p=1.0)
        rho0 = thermal_state(0.1, config.cutoff)
        kernel = config_kernel(config)
        state = rho0.entries
        for _ in range(3):
            state, _ = kernel.apply(state)
        np.testing.assert_allclose(pump_map_power(config, 3, rho0).entries, state, atol=1e-12)

    def test_no_pumping_is_identity(self):
        rho0 = coherent_state(0.3, 12)
        assert pump_map_power(heralded_config(pump_p=0.0), 50, rho0) is rho0
        assert pump_map_power(heralded_config(pump_p=0.5), 0, rho0) is rho0

    def test_matrix_power_matches_loop(self):
        config = heralded_config(dim=8, pump_p=0.01, lam=0.005)
        rho0 = thermal_state(0.1, 8)
        kernel = config_kernel(config)
        kicks = POWER_SWITCH + 44
        state = rho0.entries.copy()
        for _ in range(kicks):
            kicked, _ = kernel.apply(state)
            state = state + 0.01 * (kicked - state)
        np.testing.assert_allclose(pump_map_power(config, kicks, rho0).entries, state, atol=1e-10)

    def test_nonlinear_channel_rejected(self):
        config = heralded_config(pump_p=0.1, pre=SpinVector.from_amplitudes(0.4, 0.6),
                                 post=SpinVector.from_amplitudes(0.9, -0.1))
        with pytest.raises(UnsupportedChannelError):
            pump_map_power(config, 10, thermal_state(0.1, config.cutoff))

    def test_joint_failures_are_linear(self):
        channel = GainChannel(ChannelMode.FAILURES, SpinVector.from_amplitudes(0.4, 0.6),
                              SpinVector.from_amplitudes(0.9, -0.1), math.pi, 0.01, FailureWeighting.JOINT)
        config = MaserConfig(channel, kappa=1e-4, nbar0=0.1, delta_t=41 * math.pi, pump_p=0.5, cutoff=12)
        out = pump_map_power(config, 4, thermal_state(0.1, 12))
        assert out.satisfies_invariants()

    def test_negative_kicks(self):
        with pytest.raises(InvalidParameterError):
            pump_map_power(heralded_config(pump_p=0.5), -1, thermal_state(0.1, 12))


class TestFokkerPlanck:
    def _grids(self):
        axis = np.linspace(-1.0, 4.0, 10)
        return np.linspace(0.0, 5e5, 10), (axis[:, None] + 1j * axis[None, :]).ravel()

    def test_thermal_start_solves_the_equation(self):
        times, betas = self._grids()
        assert fokker_planck_residual(ClosedFormSolution(**FIG2), times, betas) <= 1e-8

    def test_undriven_decay(self):
        times, betas = self._grids()
        sol = ClosedFormSolution(0.0, 1e-5, 0.1, 0.0)
        assert fokker_planck_residual(sol, times, betas) <= 1e-10

    def test_perturbed_width_is_detected(self):
        times, betas = self._grids()
        assert fokker_planck_residual(ClosedFormSolution(**FIG2), times, betas, d_scale=1.01) > 1e-3

    def test_non_finite_grid(self):
        with pytest.raises(InvalidParameterError):
            fokker_planck_residual(ClosedFormSolution(**FIG2), [0.0], [complex(np.inf, 0)])


class TestGeneratingFunction:
    def test_thermal(self):
        sol = ClosedFormSolution(**FIG2)
        assert g2_series_oracle(sol, 0.0) == pytest.approx(2.0, abs=1e-6)

    def test_steady_state_matches_closed_form(self):
        sol = ClosedFormSolution(**FIG2)
        series = g2_series_oracle(sol, math.inf)
        assert series == pytest.approx(1.0204, abs=1e-4)
        assert series == pytest.approx(g2_analytic(sol, math.inf), abs=1e-8)

    def test_poisson_limit(self):
        sol = ClosedFormSolution(FIG2['lam'], FIG2['kappa'], 0.0, FIG2['r'])
        assert g2_series_oracle(sol, math.inf) == pytest.approx(1.0, abs=1e-4)

    def test_truncation_floor(self):
        with pytest.raises(InvalidParameterError):
            g2_series_oracle(ClosedFormSolution(**FIG2), math.inf, n_max=20)

