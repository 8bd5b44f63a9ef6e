"""The `verify` suite: oracle checks against the fast paths."""

import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np

from constants import ORACLE_TOL
from errors import PhononMaserError
from models.channel import ChannelMode, GainChannel
from models.config import MaserConfig
from models.solution import ClosedFormSolution
from models.spin import SpinVector
from physics.closed_form import g2_analytic, steady_state_phonons
from physics.dynamics import integrate_ode
from physics.fock_core import thermal_state
from physics.gain_channels import gain_map
from physics.observables import mean_phonons
from physics.oracle import (
    condition_on_spin,
    fokker_planck_residual,
    g2_series_oracle,
    joint_evolution_oracle,
    pump_map_power,
)
from ui.terminal import Console

logger = logging.getLogger(__name__)

# Operating point of the bundled fig2 scenario
FIG2_LAMBDA = 0.001
FIG2_KAPPA = 1e-5
FIG2_NBAR0 = 0.1
FIG2_DELTA_T = 41 * math.pi

SWEEP_LAMBDAS = (0.001, 0.01, 0.06)
SWEEP_TAUS = (math.pi / 2, math.pi, 3 * math.pi / 2)
SWEEP_PRE_STATES = 20
SWEEP_SEED = 20240611


@dataclass
class CheckResult:
    """Outcome of one verify check."""
    name: str
    passed: bool
    detail: str

    def to_dict(self) -> dict:
        """Convert to dictionary."""
        return {'name': self.name, 'passed': self.passed, 'detail': self.detail}


def random_pre_states(count: int, seed: int) -> List[SpinVector]:
    """Uniformly random spin states (complex Gaussian amplitudes)."""
    rng = np.random.default_rng(seed)
    raw = rng.normal(size=(count, 2)) + 1j * rng.normal(size=(count, 2))
    return [SpinVector.from_amplitudes(up, down) for up, down in raw]


def check_joint_evolution(dim: int = 40) -> CheckResult:
    """Factored U(tau) against exp(-iH tau) over random pre-states, lambdas and taus."""
    rho = thermal_state(FIG2_NBAR0, dim)
    worst = 0.0
    cases = 0
    for pre in random_pre_states(SWEEP_PRE_STATES, SWEEP_SEED):
        post = SpinVector.from_amplitudes(0.9, -0.1) if cases % 2 else SpinVector.down()
        for lam in SWEEP_LAMBDAS:
            for tau in SWEEP_TAUS:
                joint = joint_evolution_oracle(pre, tau, lam, rho)
                # heralded branch of the fast path against the oracle's conditioned state
                channel = GainChannel(ChannelMode.HERALDED, pre, post, tau, lam)
                fast, _ = gain_map(channel, rho)
                slow = condition_on_spin(joint, post.projector())
                worst = max(worst, float(np.max(np.abs(fast.entries - slow.entries))))
                cases += 1
    passed = worst <= ORACLE_TOL
    return CheckResult('joint_evolution', passed, f"{cases} cases at dim {dim}, max deviation {worst:.2e}")


def check_pump_power(dim: int = 26, spins: int = 100, p: float = 1e-3) -> CheckResult:
    """Binomial pump map with K = r t / p kicks against the loss-free r(M - 1) flow."""
    channel = GainChannel(ChannelMode.HERALDED, SpinVector.plus(), SpinVector.down(), math.pi, FIG2_LAMBDA)
    lossless = MaserConfig(channel, kappa=1e-12, nbar0=FIG2_NBAR0, delta_t=FIG2_DELTA_T, cutoff=dim)
    pumped = MaserConfig(channel, kappa=1e-12, nbar0=FIG2_NBAR0, delta_t=FIG2_DELTA_T, pump_p=p, cutoff=dim)
    rho0 = thermal_state(FIG2_NBAR0, dim)
    t_end = spins * FIG2_DELTA_T
    kicks = int(round(spins / p))
    product = mean_phonons(pump_map_power(pumped, kicks, rho0))
    flow = integrate_ode(lossless, rho0, t_end, [0.0, t_end]).final_mean
    gap = abs(product - flow) / flow
    return CheckResult('pump_map_power', gap <= 0.01, f"K = {kicks}: {product:.6f} vs ODE {flow:.6f} ({gap:.2e} rel.)")


def check_fokker_planck() -> CheckResult:
    sol = ClosedFormSolution(FIG2_LAMBDA, FIG2_KAPPA, FIG2_NBAR0, 1.0 / FIG2_DELTA_T)
    times = np.linspace(0.0, 5.0 / FIG2_KAPPA, 10)
    axis = np.linspace(-1.0, 4.0, 10)
    betas = (axis[:, None] + 1j * axis[None, :]).ravel()
    exact = fokker_planck_residual(sol, times, betas)
    broken = fokker_planck_residual(sol, times, betas, d_scale=1.01)
    passed = exact <= 1e-8 and broken > 1e-3
    return CheckResult('fokker_planck', passed, f"residual {exact:.2e}, perturbed d(t): {broken:.2e}")


def check_generating_function() -> CheckResult:
    sol = ClosedFormSolution(FIG2_LAMBDA, FIG2_KAPPA, FIG2_NBAR0, 1.0 / FIG2_DELTA_T)
    series = g2_series_oracle(sol, math.inf)
    closed = g2_analytic(sol, math.inf)
    gap = abs(series - closed)
    return CheckResult('g2_generating_function', gap <= 1e-8, f"Q(s): {series:.10f}, closed form {closed:.10f}")


def check_steady_state() -> CheckResult:
    sol = ClosedFormSolution(FIG2_LAMBDA, FIG2_KAPPA, FIG2_NBAR0, 1.0 / FIG2_DELTA_T)
    n_ss = steady_state_phonons(sol)
    return CheckResult('steady_state_formula', abs(n_ss - 9.744) < 5e-4, f"n_SS = {n_ss:.6f}")


def run_verification(dim: int = 40, console: Optional[Console] = None) -> List[CheckResult]:
    """
    Run every oracle check; failures are reported, not raised.

    Args:
        dim: Fock dimension of the joint-evolution sweep (<= 64)
        console: progress reporting

    Returns:
        one CheckResult per check
    """
    console = console or Console(quiet=True)
    checks: List[Tuple[str, Callable[[], CheckResult]]] = [
        ("joint_evolution", lambda: check_joint_evolution(dim)),
        ("pump_map_power", check_pump_power),
        ("fokker_planck", check_fokker_planck),
        ("g2_generating_function", check_generating_function),
        ("steady_state_formula", check_steady_state),
    ]
    results = []
    for name, check in checks:
        try:
            result = check()
        except PhononMaserError as exc:
            logger.debug("verify check %s raised", name, exc_info=True)
            result = CheckResult(name, False, str(exc))
        results.append(result)
        console.add_log('success' if result.passed else 'error',
                        f"{'OK    ' if result.passed else 'FEHLER'} {result.name}: {result.detail}")
    return results
