"""
Brute-force validators for the fast paths.

Each check rebuilds its quantity by an independent route:

* joint_evolution_oracle: exp(-i H tau) on the spin x oscillator space
  against the factored branch displacements
* pump_map_power: the finite-K binomial pump map against the master equation
* fokker_planck_residual: the Gaussian P-function against its own PDE
* g2_series_oracle: g2(0) from the generating function of P(n)
"""

import logging
import math
from typing import Iterable, List, Tuple

import numpy as np

from constants import FP_NORMALIZATION_FLOOR, ORACLE_MAX_DIM, ORACLE_TOL, Q_DERIVATIVE_STEP
from errors import (
    FactorizationViolationError,
    InvalidParameterError,
    PrecisionError,
    UnsupportedChannelError,
)
from models.channel import ChannelMode, FailureWeighting, GainChannel
from models.config import MaserConfig
from models.fock import DensityMatrix
from models.solution import ClosedFormSolution
from models.spin import SpinVector
from physics.closed_form import default_n_max, fp_coefficients, pn_analytic, steady_state_phonons
from physics.fock_core import annihilation_matrix, displacement, displacement_pad, embed, expm_array, rotation
from physics.gain_channels import eta, failure_effect, gain_kernel

logger = logging.getLogger(__name__)

SIGMA_Z = np.diag([1.0, -1.0]).astype(complex)
SERIES_TAIL_TOL = 1e-12
SERIES_NORM_TOL = 1e-8
# K above which pump_map_power switches to a superoperator matrix power
POWER_SWITCH = 256


def _check_oracle_dim(dim: int) -> None:
    if dim > ORACLE_MAX_DIM:
        raise InvalidParameterError(f"oracle dimension is capped at {ORACLE_MAX_DIM}, got {dim}")


def joint_hamiltonian(lam: float, dim: int) -> np.ndarray:
    """H = 1 (x) n - lam sigma_z (x) (b + b^dagger), spin index first."""
    b = annihilation_matrix(dim)
    n_op = b.conj().T @ b
    return np.kron(np.eye(2), n_op) - lam * np.kron(SIGMA_Z, b + b.conj().T)


def _factored_blocks(pre: SpinVector, tau: float, lam: float, rho: np.ndarray) -> np.ndarray:
    """Joint state from D(s lam eta) R(tau) per spin branch, as a 2 x 2 grid of blocks."""
    dim = rho.shape[0]
    rot = rotation(tau, dim).entries
    amps = pre.amplitudes
    kraus = [displacement(sign * lam * eta(tau), dim).entries @ rot for sign in (1, -1)]
    blocks = np.empty((2, 2, dim, dim), dtype=complex)
    for i in range(2):
        for j in range(2):
            blocks[i, j] = amps[i] * np.conj(amps[j]) * (kraus[i] @ rho @ kraus[j].conj().T)
    return blocks


def _direct_blocks(pre: SpinVector, tau: float, lam: float, rho: np.ndarray) -> np.ndarray:
    """Joint state from exp(-i H tau) on a padded space, cut back to dim per spin."""
    dim = rho.shape[0]
    big = dim + displacement_pad(2.0 * lam)
    unitary = expm_array(-1j * tau * joint_hamiltonian(lam, big))
    joint_in = np.kron(pre.projector(), embed(rho, big))
    joint_out = unitary @ joint_in @ unitary.conj().T
    blocks = np.empty((2, 2, dim, dim), dtype=complex)
    for i in range(2):
        for j in range(2):
            blocks[i, j] = joint_out[i * big:i * big + dim, j * big:j * big + dim]
    return blocks


def _assemble(blocks: np.ndarray) -> np.ndarray:
    return np.block([[blocks[0, 0], blocks[0, 1]], [blocks[1, 0], blocks[1, 1]]])


def joint_evolution_oracle(pre: SpinVector, tau: float, lam: float, rho: DensityMatrix) -> DensityMatrix:
    """
    Evolve rho (x) |pre><pre| with the full spin-oscillator Hamiltonian.

    The factored form drops a global phase lam^2 (tau - sin tau) that is the
    same for both spin branches, so the joint density matrices must agree.

    Args:
        pre: spin state before the interaction
        tau: interaction time
        lam: scaled coupling
        rho: oscillator state, supported away from the cutoff

    Returns:
        joint state on 2 * dim levels (spin index first)

    Raises:
        FactorizationViolationError: the two routes differ by more than ORACLE_TOL
    """
    _check_oracle_dim(rho.dim)
    direct = _direct_blocks(pre, tau, lam, rho.entries)
    factored = _factored_blocks(pre, tau, lam, rho.entries)
    gap = float(np.max(np.abs(direct - factored)))
    logger.debug("joint evolution oracle: dim %d, lam %.3g, tau %.4g, gap %.3e", rho.dim, lam, tau, gap)
    if gap > ORACLE_TOL:
        raise FactorizationViolationError(
            f"factored evolution deviates from exp(-iH tau) by {gap:.3e} (lam = {lam}, tau = {tau})"
        )
    return DensityMatrix.from_matrix(_assemble(direct))


def condition_on_spin(joint: DensityMatrix, effect: np.ndarray) -> DensityMatrix:
    """Tr_spin[(E (x) 1) joint], renormalized."""
    dim = joint.dim // 2
    out = np.zeros((dim, dim), dtype=complex)
    for i in range(2):
        for j in range(2):
            out += effect[j, i] * joint.entries[i * dim:(i + 1) * dim, j * dim:(j + 1) * dim]
    return DensityMatrix.from_matrix(out)


def _linear_terms(channel: GainChannel) -> List[Tuple[float, np.ndarray]]:
    """(weight, effect) pairs whose normalized sum is the channel map."""
    if channel.mode == ChannelMode.TRACE:
        return [(1.0, np.eye(2))]
    if channel.mode == ChannelMode.HERALDED:
        return [(1.0, channel.post.projector())]
    if channel.failure_weighting == FailureWeighting.JOINT:
        return [(1.0, np.eye(2))]
    if channel.failure_weighting == FailureWeighting.PROJECTOR:
        return [(1.0, failure_effect(channel))]
    ps = abs(channel.pre.overlap(channel.post)) ** 2
    return [(ps, channel.post.projector()), (1.0 - ps, channel.post.orthogonal().projector())]


def _linear_channel(config: MaserConfig):
    """Channel map as a function that is linear in its (possibly non-Hermitian) argument."""
    channel = config.channel
    kernel = gain_kernel(channel, config.cutoff, -config.tau if config.phase_locked else config.delta_t)
    pre = channel.pre.amplitudes
    terms = []
    for weight, effect in _linear_terms(channel):
        norm = float(np.real(np.vdot(pre, effect @ pre)))
        if weight > 0 and norm > 0:
            terms.append((weight / norm, effect))

    def apply(matrix: np.ndarray) -> np.ndarray:
        out = np.zeros_like(matrix)
        for scale, effect in terms:
            out += scale * kernel.condition(matrix, effect)
        return out

    return apply


def pump_map_power(config: MaserConfig, kicks: int, rho0: DensityMatrix) -> DensityMatrix:
    """
    {1 + p (M - 1)}^K rho0, the binomially averaged gain of K pump attempts.

    Large K uses an exact superoperator matrix power instead of the loop.

    Args:
        config: maser parameters (pump_p and channel are used, damping is not)
        kicks: number K of pump attempts
        rho0: initial state

    Raises:
        UnsupportedChannelError: the channel is state-dependently normalized
    """
    if kicks < 0:
        raise InvalidParameterError(f"K must be >= 0, got {kicks}")
    if not config.channel.is_linear:
        raise UnsupportedChannelError(
            f"binomial pump averaging needs a linear channel, {config.channel.mode.value} is not"
        )
    p = config.pump_p
    if kicks == 0 or p == 0:
        return rho0

    gain = _linear_channel(config)
    if kicks <= POWER_SWITCH:
        state = rho0.entries.copy()
        for _ in range(kicks):
            state = state + p * (gain(state) - state)
        return DensityMatrix.from_matrix(state, strict=False)

    dim = rho0.dim
    size = dim * dim
    step = np.empty((size, size), dtype=complex)
    for col in range(size):
        basis = np.zeros(size, dtype=complex)
        basis[col] = 1.0
        matrix = basis.reshape((dim, dim), order='F')
        step[:, col] = (matrix + p * (gain(matrix) - matrix)).ravel(order='F')
    power = np.linalg.matrix_power(step, kicks)
    state = (power @ rho0.entries.ravel(order='F')).reshape((dim, dim), order='F')
    return DensityMatrix.from_matrix(state, strict=False)


def _fp_rates(sol: ClosedFormSolution, t: float, d_scale: float) -> Tuple[complex, complex, float, complex, complex, float]:
    """(b, c, d) and their time derivatives."""
    b, c, d = fp_coefficients(sol, t)
    half = math.exp(-sol.kappa * t / 2.0)
    full = half ** 2
    target = sol.drift / (sol.kappa * sol.nbar0)
    b_dot = 0.5 * sol.kappa * half * (target - sol.beta0 / sol.nbar0)
    denom = sol.nbar0 * (1.0 - full) + sol.epsilon * full
    d_dot = sol.kappa * full * (sol.nbar0 - sol.epsilon) / denom ** 2
    return b, c, d * d_scale, b_dot, b_dot, d_dot * d_scale


def fokker_planck_residual(
    sol: ClosedFormSolution,
    t_grid: Iterable[float],
    beta_grid: Iterable[complex],
    d_scale: float = 1.0,
) -> float:
    """
    Largest residual of the Gaussian P-function in its Fokker-Planck equation.

    kappa P + (dP/dbeta)(kappa beta - 4 lam r)/2 + (dP/dbeta*)(kappa beta* - 4 lam r)/2
    + kappa nbar0 d2P/dbeta dbeta* - dP/dt, normalized by max |dP/dt| over the grid
    (by max |kappa P| when the solution is stationary).

    Args:
        sol: analytic parameters (amplification folds into the drift)
        t_grid: times
        beta_grid: complex phase-space points
        d_scale: multiplies d(t); values != 1 give a deliberately wrong solution

    Returns:
        normalized maximum absolute residual
    """
    betas = np.asarray(list(beta_grid), dtype=complex)
    if not np.all(np.isfinite(betas)):
        raise InvalidParameterError("beta grid must be finite")
    kappa = sol.kappa
    drift = sol.drift
    worst = 0.0
    scale_dt = 0.0
    scale_p = 0.0
    for t in t_grid:
        b, c, d, b_dot, c_dot, d_dot = _fp_rates(sol, float(t), d_scale)
        a = math.log(-d / math.pi) + b * c / d
        a_dot = d_dot / d + (b_dot * c + b * c_dot) / d - b * c * d_dot / d ** 2

        conj = np.conj(betas)
        p = np.exp(a + b * betas + c * conj + d * np.abs(betas) ** 2)
        dp_dbeta = (b + d * conj) * p
        dp_dconj = (c + d * betas) * p
        dp_mixed = (d + (b + d * conj) * (c + d * betas)) * p
        dp_dt = (a_dot + b_dot * betas + c_dot * conj + d_dot * np.abs(betas) ** 2) * p

        residual = (
            kappa * p
            + 0.5 * dp_dbeta * (kappa * betas - drift)
            + 0.5 * dp_dconj * (kappa * conj - drift)
            + kappa * sol.nbar0 * dp_mixed
            - dp_dt
        )
        worst = max(worst, float(np.max(np.abs(residual))))
        scale_dt = max(scale_dt, float(np.max(np.abs(dp_dt))))
        scale_p = max(scale_p, float(np.max(np.abs(kappa * p))))

    scale = scale_dt if scale_dt > FP_NORMALIZATION_FLOOR else scale_p
    if scale <= 0:
        return worst
    return worst / scale


def _richardson(derivative, h: float) -> float:
    """One Richardson step for a central difference of order h^2."""
    return (4.0 * derivative(h / 2.0) - derivative(h)) / 3.0


def g2_series_oracle(sol: ClosedFormSolution, t: float, n_max: int = None) -> float:
    """
    g2(0) from Q(s) = sum (1 - s)^n P(n).

    Q'(0) = -<n> and Q''(0) = <n(n-1)>, each taken by a central difference with
    step Q_DERIVATIVE_STEP and one Richardson extrapolation.

    Raises:
        PrecisionError: the truncated series has not converged
    """
    floor = default_n_max(sol)
    n_max = floor if n_max is None else n_max
    if n_max < 10 + 10 * steady_state_phonons(sol):
        raise InvalidParameterError(f"series truncation {n_max} below 10 + 10 n_SS")
    ns = np.arange(n_max + 1)
    probs = np.asarray(pn_analytic(sol, t, ns))
    if probs[-1] > SERIES_TAIL_TOL or abs(probs.sum() - 1.0) > SERIES_NORM_TOL:
        raise PrecisionError(
            f"P(n) series not converged at n_max = {n_max} (tail {probs[-1]:.3e}, sum {probs.sum():.12f})"
        )

    def shift(s: float) -> float:
        # Q(s) - Q(0), summed without cancellation for small s
        return float(np.sum(np.expm1(ns * np.log1p(-s)) * probs))

    def first(h: float) -> float:
        return (shift(h) - shift(-h)) / (2.0 * h)

    def second(h: float) -> float:
        return (shift(h) + shift(-h)) / h ** 2

    mean = -_richardson(first, Q_DERIVATIVE_STEP)
    factorial_moment = _richardson(second, Q_DERIVATIVE_STEP)
    if mean <= 0:
        raise PrecisionError("generating function gives a non-positive mean phonon number")
    return factorial_moment / mean ** 2
