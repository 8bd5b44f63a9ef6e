"""
Per-spin gain maps built from the factored evolution operator.

For a spin in sigma_z eigenstate s = +1 (up) or -1 (down) the interaction
over tau acts on the oscillator as K_s = D(s * lam * eta) R(tau) with
R(tau) = exp(-i n tau) and eta = 1 - exp(-i tau). A spin measurement with
effect E (2x2, acting on the spin after the interaction) leaves the oscillator in

    rho' ~ sum_{s,s'} <s'|E|s> c_s c_s'^* K_s rho K_s'^dagger

where c_s are the pre-selected amplitudes. E = |post><post| is heralded
post-selection, E = identity is the partial trace.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Tuple

import numpy as np

from errors import DegeneratePostselectionError, InvalidParameterError
from models.channel import ChannelMode, FailureWeighting, GainChannel
from models.fock import DensityMatrix
from models.spin import SpinVector
from physics.fock_core import displacement, rotation

logger = logging.getLogger(__name__)

SIGNS = (1, -1)  # index 0 = up, 1 = down
DEGENERATE_TRACE = 1e-24


def eta(tau: float) -> complex:
    """1 - exp(-i tau)."""
    return 1.0 - np.exp(-1j * tau)


def spin_overlap_probability(pre: SpinVector, post: SpinVector) -> float:
    """P_S = |<post|pre>|^2."""
    return float(abs(pre.overlap(post)) ** 2)


def weak_value(pre: SpinVector, post: SpinVector) -> complex:
    """<post|sigma_z|pre> / <post|pre>."""
    overlap = pre.overlap(post)
    if abs(overlap) < 1e-15:
        raise DegeneratePostselectionError("weak value undefined for orthogonal pre/post states")
    numerator = np.conj(post.up_amplitude) * pre.up_amplitude - np.conj(post.down_amplitude) * pre.down_amplitude
    return complex(numerator / overlap)


def post_state_for_probability(pre: SpinVector, probability: float) -> SpinVector:
    """
    Post-selected state with |<post|pre>|^2 = probability whose weak value has
    a non-negative real part (the amplifying choice).
    """
    if not 0.0 < probability <= 1.0:
        raise InvalidParameterError(f"post-selection probability must lie in (0, 1], got {probability}")
    perp = pre.orthogonal()
    candidates = []
    for phase in (1.0, -1.0):
        amps = np.sqrt(probability) * pre.amplitudes + phase * np.sqrt(1.0 - probability) * perp.amplitudes
        candidates.append(SpinVector.from_amplitudes(amps[0], amps[1]))
    if probability == 1.0:
        return candidates[0]
    return max(candidates, key=lambda post: weak_value(pre, post).real)


def conditioned_branch_map(sign: int, tau: float, lam: float, rho: DensityMatrix) -> np.ndarray:
    """
    D(sign lam eta) R rho R^dagger D(-sign lam eta), unnormalized.

    Args:
        sign: sigma_z eigenvalue of the branch (+1 up, -1 down)
        tau: interaction time
        lam: scaled coupling
        rho: oscillator state

    Returns:
        dim x dim complex array
    """
    if sign not in SIGNS:
        raise InvalidParameterError(f"branch sign must be +1 or -1, got {sign}")
    kraus = _branch_kraus(tau, lam, rho.dim, 0.0)[SIGNS.index(sign)]
    return kraus @ rho.entries @ kraus.conj().T


@lru_cache(maxsize=64)
def _branch_kraus(tau: float, lam: float, dim: int, frame_angle: float) -> Tuple[np.ndarray, np.ndarray]:
    """(G K_up, G K_down) with G = exp(-i n frame_angle)."""
    rot = rotation(tau, dim).entries
    frame = rotation(frame_angle, dim).entries
    amplitude = lam * eta(tau)
    out = []
    for sign in SIGNS:
        if amplitude == 0:
            kraus = frame @ rot
        else:
            kraus = frame @ displacement(sign * amplitude, dim).entries @ rot
        kraus.setflags(write=False)
        out.append(kraus)
    return tuple(out)


@dataclass(frozen=True)
class SpinOutcome:
    """One measurement record of a spin: its probability and spin effect."""
    label: str
    probability: float
    effect: np.ndarray


def channel_outcomes(channel: GainChannel) -> List[SpinOutcome]:
    """
    Records a sampled run draws from.

    Tracing draws the sigma_z value with |c_s|^2; post-selection channels
    draw success with P_S and failure with 1 - P_S.
    """
    if channel.mode == ChannelMode.TRACE:
        weights = np.abs(channel.pre.amplitudes) ** 2
        return [
            SpinOutcome('up', float(weights[0]), SpinVector.up().projector()),
            SpinOutcome('down', float(weights[1]), SpinVector.down().projector()),
        ]
    ps = spin_overlap_probability(channel.pre, channel.post)
    return [
        SpinOutcome('success', ps, channel.post.projector()),
        SpinOutcome('failure', 1.0 - ps, channel.post.orthogonal().projector()),
    ]


def first_order_amplification(channel: GainChannel) -> float:
    """
    Mean kick per spin in units of lam*|eta| to first order in lam.

    1 for a spin eigenstate, the real weak value for heralding, <sigma_z> for tracing.
    """
    pre = channel.pre.amplitudes
    sigma_z = np.diag([1.0, -1.0])

    def ratio(effect):
        norm = np.real(np.vdot(pre, effect @ pre))
        return np.real(np.vdot(pre, effect @ sigma_z @ pre)) / norm

    if channel.mode == ChannelMode.TRACE:
        return float(ratio(np.eye(2)))
    if channel.mode == ChannelMode.HERALDED:
        return float(ratio(channel.post.projector()))
    if channel.failure_weighting == FailureWeighting.PROJECTOR:
        return float(ratio(failure_effect(channel)))
    if channel.failure_weighting == FailureWeighting.JOINT:
        return float(ratio(np.eye(2)))
    return float(sum(o.probability * ratio(o.effect) for o in channel_outcomes(channel) if o.probability > 0))


def failure_effect(channel: GainChannel) -> np.ndarray:
    ps = spin_overlap_probability(channel.pre, channel.post)
    return ps * channel.post.projector() + (1.0 - ps) * channel.post.orthogonal().projector()


class GainKernel:
    """
    Precomputed operators for applying one channel on a fixed cutoff.

    frame_angle rotates the output by exp(-i n frame_angle): 0 is the lab
    frame right after the interaction, -tau removes the free rotation of the
    interaction window (co-rotating frame), delta_t appends the free
    evolution up to the next spin.
    """

    def __init__(self, channel: GainChannel, dim: int, frame_angle: float = 0.0):
        self.channel = channel
        self.dim = dim
        self.frame_angle = frame_angle
        self.kraus = _branch_kraus(channel.tau, channel.lam, dim, frame_angle)
        self.pre = channel.pre.amplitudes
        self.success_probability = (
            1.0 if channel.mode == ChannelMode.TRACE
            else spin_overlap_probability(channel.pre, channel.post)
        )

    def condition(self, matrix: np.ndarray, effect: np.ndarray) -> np.ndarray:
        """Unnormalized oscillator state after measuring the spin with `effect`."""
        left = [self.pre[i] * (self.kraus[i] @ matrix) for i in range(2)]
        out = np.zeros_like(matrix)
        for i in range(2):
            for j in range(2):
                weight = effect[j, i]
                if weight == 0:
                    continue
                out += weight * (left[i] @ (np.conj(self.pre[j]) * self.kraus[j].conj().T))
        return out

    def condition_normalized(self, matrix: np.ndarray, effect: np.ndarray) -> Tuple[np.ndarray, float]:
        out = self.condition(matrix, effect)
        weight = float(np.real(np.trace(out)))
        if weight <= DEGENERATE_TRACE:
            raise DegeneratePostselectionError(
                f"post-selection has zero success probability (trace {weight:.3e})"
            )
        return out / weight, weight

    def apply(self, matrix: np.ndarray) -> Tuple[np.ndarray, float]:
        """
        Apply the channel to a raw density matrix.

        Returns:
            (output matrix, success weight)
        """
        mode = self.channel.mode
        if mode == ChannelMode.TRACE:
            return self.condition(matrix, np.eye(2)), 1.0
        if mode == ChannelMode.HERALDED:
            return self.condition_normalized(matrix, self.channel.post.projector())

        weighting = self.channel.failure_weighting
        ps = self.success_probability
        if weighting == FailureWeighting.PROJECTOR:
            out, _ = self.condition_normalized(matrix, failure_effect(self.channel))
            return out, ps
        if weighting == FailureWeighting.JOINT:
            out, _ = self.condition_normalized(matrix, np.eye(2))
            return out, ps
        out = np.zeros_like(matrix)
        for outcome in channel_outcomes(self.channel):
            if outcome.probability <= 0:
                continue
            branch, _ = self.condition_normalized(matrix, outcome.effect)
            out += outcome.probability * branch
        return out, ps


@lru_cache(maxsize=64)
def gain_kernel(channel: GainChannel, dim: int, frame_angle: float = 0.0) -> GainKernel:
    return GainKernel(channel, dim, frame_angle)


def gain_map(channel: GainChannel, rho: DensityMatrix) -> Tuple[DensityMatrix, float]:
    """
    Oscillator state after one spin of the given channel.

    Args:
        channel: measurement channel with pre/post states, tau and lambda
        rho: oscillator state before the spin

    Returns:
        (rho_out, success_weight): success_weight is the state-dependent trace for
        heralding, P_S for post-selection with failures and 1 for tracing
    """
    out, weight = gain_kernel(channel, rho.dim).apply(rho.entries)
    return DensityMatrix.from_matrix(out), weight
