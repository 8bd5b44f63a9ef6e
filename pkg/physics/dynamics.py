"""
Time evolution of the oscillator under spin injection and thermal damping.

Two drivers share the same per-spin gain kernel:

* integrate_ode: the coarse-grained maser master equation
  d rho/dt = r (M - 1) rho + L rho  [- (r p / 2)(M - 1)^2 rho for p > 0]
* run_discrete: one gain kick per spin followed by exact relaxation over delta_t

The master equation carries no free Hamiltonian, so it lives in the frame
co-rotating with the oscillator. With phase_locked (default) the kick is
taken in that frame, i.e. the free rotation of the interaction window is
removed: M(rho) = R(tau)^+ gain_map(rho) R(tau). When injection is not
phase locked the lab-frame stroboscopic map exp(-i n delta_t) gain_map(rho) exp(i n delta_t)
is used instead. The thermal Lindbladian is phase covariant, so it is the
same in both frames.
"""

import logging
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from constants import (
    DEFAULT_GRID_POINTS,
    ODE_ATOL,
    ODE_METHOD,
    ODE_RTOL,
    STEADY_BAND_TOL,
    STEADY_WINDOW,
    TRACE_TOL,
)
from errors import InvalidParameterError, StiffnessError
from models.config import MaserConfig
from models.fock import DensityMatrix
from models.scenario import DiscreteMode
from models.series import TimeSeries
from physics.fock_core import annihilation_matrix
from physics.gain_channels import GainKernel, channel_outcomes, gain_kernel
from physics.observables import g2_zero_numeric, mean_phonons

logger = logging.getLogger(__name__)


def frame_angle(config: MaserConfig) -> float:
    """Rotation appended to each kick (see module docstring)."""
    return -config.tau if config.phase_locked else config.delta_t


def config_kernel(config: MaserConfig) -> GainKernel:
    return gain_kernel(config.channel, config.cutoff, frame_angle(config))


class MaserGenerator:
    """Right-hand side of the maser master equation on raw matrices."""

    def __init__(self, config: MaserConfig):
        self.config = config
        self.kernel = config_kernel(config)
        b = annihilation_matrix(config.cutoff)
        self.b = b
        self.bdag = b.conj().T
        self.n_op = self.bdag @ b
        self.m_op = b @ self.bdag
        self.down_rate = config.kappa * (1.0 + config.nbar0)
        self.up_rate = config.kappa * config.nbar0

    def lindblad(self, rho: np.ndarray) -> np.ndarray:
        """Thermal damping at (kappa, nbar0)."""
        b, bdag = self.b, self.bdag
        out = self.down_rate * (b @ rho @ bdag - 0.5 * (self.n_op @ rho + rho @ self.n_op))
        if self.up_rate:
            out += self.up_rate * (bdag @ rho @ b - 0.5 * (self.m_op @ rho + rho @ self.m_op))
        return out

    def gain(self, rho: np.ndarray) -> np.ndarray:
        return self.kernel.apply(rho)[0]

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        r = self.config.injection_rate
        kicked = self.gain(rho)
        out = r * (kicked - rho) + self.lindblad(rho)
        p = self.config.pump_p
        if p > 0:
            # (M - 1)^2 rho = M(M rho) - 2 M rho + rho
            twice = self.gain(kicked)
            out -= 0.5 * r * p * (twice - 2.0 * kicked + rho)
        return out


def maser_rhs(rho: DensityMatrix, config: MaserConfig) -> np.ndarray:
    """
    d rho / dt of the maser master equation.

    Args:
        rho: oscillator state (dim must equal config.cutoff)
        config: maser parameters

    Returns:
        dim x dim complex derivative
    """
    if rho.dim != config.cutoff:
        raise InvalidParameterError(f"state dim {rho.dim} does not match cutoff {config.cutoff}")
    return MaserGenerator(config)(rho.entries)


def lindblad_superoperator(kappa: float, nbar0: float, dim: int) -> np.ndarray:
    """Thermal Lindbladian as a dim^2 x dim^2 matrix acting on column-stacked rho."""
    b = annihilation_matrix(dim)
    bdag = b.conj().T
    eye = np.eye(dim)
    n_op = bdag @ b
    m_op = b @ bdag

    def sandwich(left, right):
        # vec(left X right) = (right^T kron left) vec(X)
        return np.kron(right.T, left)

    down = sandwich(b, bdag) - 0.5 * (sandwich(n_op, eye) + sandwich(eye, n_op))
    up = sandwich(bdag, b) - 0.5 * (sandwich(m_op, eye) + sandwich(eye, m_op))
    return kappa * (1.0 + nbar0) * down + kappa * nbar0 * up


@lru_cache(maxsize=16)
def relaxation_propagator(kappa: float, nbar0: float, dim: int, t: float) -> np.ndarray:
    """exp(L t) on column-stacked density matrices."""
    prop = expm(lindblad_superoperator(kappa, nbar0, dim) * t)
    prop.setflags(write=False)
    return prop


def relax(rho: np.ndarray, propagator: np.ndarray) -> np.ndarray:
    dim = rho.shape[0]
    return (propagator @ rho.ravel(order='F')).reshape((dim, dim), order='F')


def relax_moments(mean_b: complex, mean_n: float, kappa: float, nbar0: float, t: float) -> Tuple[complex, float]:
    """Closed-form thermal attenuator on <b> and <n>."""
    return mean_b * np.exp(-kappa * t / 2.0), nbar0 + (mean_n - nbar0) * np.exp(-kappa * t)


def default_output_grid(t_end: float, points: int = DEFAULT_GRID_POINTS) -> np.ndarray:
    """t = 0 followed by logarithmically spaced samples up to t_end."""
    return np.concatenate(([0.0], np.geomspace(t_end * 1e-4, t_end, points - 1)))


class _Recorder:
    """Collects observables and invariant figures per sample."""

    def __init__(self, keep_snapshots: bool):
        self.keep_snapshots = keep_snapshots
        self.times: List[float] = []
        self.means: List[float] = []
        self.g2: List[float] = []
        self.drift: List[float] = []
        self.herm: List[float] = []
        self.eig: List[float] = []
        self.snapshots: List[Tuple[float, DensityMatrix]] = []

    def normalize(self, matrix: np.ndarray, t: float) -> Tuple[DensityMatrix, float]:
        drift = float(np.real(np.trace(matrix)) - 1.0)
        if abs(drift) > TRACE_TOL:
            logger.debug("trace drift %.3e at t = %.6g, renormalizing", drift, t)
        return DensityMatrix.from_matrix(matrix, strict=False), drift

    def record(self, t: float, rho: DensityMatrix, drift: float) -> None:
        report = rho.invariant_report()
        mean = mean_phonons(rho)
        self.times.append(float(t))
        self.means.append(mean)
        self.g2.append(g2_zero_numeric(rho) if mean > 0 else float('nan'))
        self.drift.append(drift)
        self.herm.append(report['hermitian_error'])
        self.eig.append(report['min_eigenvalue'])
        if self.keep_snapshots:
            self.snapshots.append((float(t), rho))

    def series(self, last: DensityMatrix) -> TimeSeries:
        snapshots = self.snapshots
        if not self.keep_snapshots:
            snapshots = [(self.times[-1], last)]
        return TimeSeries(
            times=self.times,
            mean_phonons=self.means,
            g2_zero=self.g2,
            trace_drift=self.drift,
            hermitian_error=self.herm,
            min_eigenvalue=self.eig,
            snapshots=snapshots,
        )


def integrate_ode(
    config: MaserConfig,
    rho0: DensityMatrix,
    t_end: float,
    output_grid: Optional[Sequence[float]] = None,
    keep_snapshots: bool = False,
) -> TimeSeries:
    """
    Integrate the maser master equation with adaptive RK45.

    Args:
        config: maser parameters
        rho0: initial oscillator state (dim = config.cutoff)
        t_end: final time
        output_grid: sample times in [0, t_end]; default 400 log-spaced points
        keep_snapshots: keep the state at every sample (final state is always kept)

    Returns:
        TimeSeries of the sampled observables
    """
    if not t_end > 0:
        raise InvalidParameterError(f"t_end must be > 0, got {t_end}")
    if rho0.dim != config.cutoff:
        raise InvalidParameterError(f"initial state dim {rho0.dim} does not match cutoff {config.cutoff}")
    grid = default_output_grid(t_end) if output_grid is None else np.asarray(output_grid, dtype=float)
    if grid.size == 0 or grid[0] < 0 or grid[-1] > t_end * (1 + 1e-12) or np.any(np.diff(grid) <= 0):
        raise InvalidParameterError("output grid must be strictly increasing within [0, t_end]")

    dim = config.cutoff
    generator = MaserGenerator(config)

    def rhs(_t, y):
        return generator(y.reshape(dim, dim)).ravel()

    recorder = _Recorder(keep_snapshots)
    state = rho0.entries.copy()
    rho = rho0
    t = 0.0
    for target in grid:
        if target > t:
            sol = solve_ivp(rhs, (t, target), state.ravel(), method=ODE_METHOD, rtol=ODE_RTOL, atol=ODE_ATOL)
            if sol.status < 0:
                raise StiffnessError(f"integration failed: {sol.message}", float(sol.t[-1]))
            state = sol.y[:, -1].reshape(dim, dim)
            t = float(target)
        rho, drift = recorder.normalize(state, t)
        state = rho.entries.copy()
        recorder.record(t, rho, drift)

    return recorder.series(rho)


def run_discrete(
    config: MaserConfig,
    rho0: DensityMatrix,
    n_spins: int,
    mode: DiscreteMode = DiscreteMode.EXPECTED,
    seed: Optional[int] = None,
    keep_snapshots: bool = False,
) -> TimeSeries:
    """
    Spin-by-spin simulation: gain kick, then exact relaxation over delta_t.

    Args:
        config: maser parameters
        rho0: initial oscillator state
        n_spins: number of spins (0 returns the initial state only)
        mode: EXPECTED applies the channel map, SAMPLED draws one outcome per spin
        seed: RNG seed, required for SAMPLED

    Returns:
        TimeSeries sampled after each spin at t = k * delta_t
    """
    if n_spins < 0:
        raise InvalidParameterError(f"n_spins must be >= 0, got {n_spins}")
    if rho0.dim != config.cutoff:
        raise InvalidParameterError(f"initial state dim {rho0.dim} does not match cutoff {config.cutoff}")
    if mode == DiscreteMode.SAMPLED and seed is None:
        raise InvalidParameterError("sampled runs need a seed")

    kernel = config_kernel(config)
    propagator = relaxation_propagator(config.kappa, config.nbar0, config.cutoff, config.delta_t)
    outcomes = channel_outcomes(config.channel)
    probabilities = np.array([o.probability for o in outcomes])
    rng = np.random.default_rng(seed)

    recorder = _Recorder(keep_snapshots)
    rho = rho0
    recorder.record(0.0, rho, float(np.real(rho.trace()) - 1.0))
    state = rho0.entries.copy()
    for spin in range(1, n_spins + 1):
        if mode == DiscreteMode.EXPECTED:
            state, _ = kernel.apply(state)
        else:
            pick = rng.choice(len(outcomes), p=probabilities / probabilities.sum())
            state, _ = kernel.condition_normalized(state, outcomes[pick].effect)
        state = relax(state, propagator)
        t = spin * config.delta_t
        rho, drift = recorder.normalize(state, t)
        state = rho.entries.copy()
        recorder.record(t, rho, drift)

    return recorder.series(rho)


def steady_state_plateau(
    series: TimeSeries,
    window: int = STEADY_WINDOW,
    band: float = STEADY_BAND_TOL,
) -> Optional[Tuple[int, float]]:
    """
    First plateau of the phonon curve.

    A plateau starts at spin k when samples k..k+window spread by at most
    `band` times their mean. Returns (k, mean over the window), or None if the
    series never settles.

    The normalised heralded map is nonlinear: at strong post-selection it keeps
    states with a wide quadrature spread orthogonal to the kick, which lowers
    the effective gain. The curve then overshoots and drifts slowly downward.
    The plateau, not the last sample, is its steady state.
    """
    if window < 1:
        raise InvalidParameterError(f"window must be >= 1, got {window}")
    means = np.asarray(series.mean_phonons, dtype=float)
    for k in range(len(means) - window):
        segment = means[k:k + window + 1]
        level = float(segment.mean())
        if np.ptp(segment) <= band * max(abs(level), TRACE_TOL):
            return k, level
    return None


def spins_to_steady_state(series: TimeSeries, fraction: float = 0.95) -> Optional[int]:
    """
    Spins until the excess phonon number is within (1 - fraction) of its plateau excess
    and stays there for the rest of the series. None when no plateau is found.
    """
    plateau = steady_state_plateau(series)
    if plateau is None:
        return None
    means = np.asarray(series.mean_phonons, dtype=float)
    _, level = plateau
    excess = level - means[0]
    slack = (1.0 - fraction) * abs(excess)
    outside = np.nonzero(np.abs(means - level) > slack)[0]
    if outside.size == 0:
        return 0
    return int(outside[-1]) + 1
