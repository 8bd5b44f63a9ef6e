"""Maser scenario parameterization."""

import logging
import math
from dataclasses import dataclass, replace
from typing import Optional

from constants import DEFAULT_CUTOFF, MIN_DELTA_T_OVER_TAU, WARN_DELTA_T_OVER_TAU
from errors import InvalidDimensionError, InvalidParameterError
from models.channel import GainChannel

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MaserConfig:
    """
    Full parameter set of one maser run (units of omega_m, hbar = 1).

    Attributes:
        channel: per-spin gain channel (carries tau and lambda)
        kappa: phonon damping rate
        nbar0: bath occupancy; the oscillator starts in the same thermal state
        delta_t: time between two consecutive spin interactions
        pump_p: pump-statistics parameter p (0 = random injection)
        cutoff: Fock dimension
        phase_locked: use the frame co-rotating with the oscillator (see dynamics)
        omega_m_hz: physical mechanical frequency, metadata only
        lambda0_hz: physical coupling, metadata only
    """
    channel: GainChannel
    kappa: float
    nbar0: float
    delta_t: float
    pump_p: float = 0.0
    cutoff: int = DEFAULT_CUTOFF
    phase_locked: bool = True
    omega_m_hz: Optional[float] = None
    lambda0_hz: Optional[float] = None

    def __post_init__(self):
        if not self.kappa > 0:
            raise InvalidParameterError(f"kappa must be > 0, got {self.kappa}")
        if not self.nbar0 >= 0:
            raise InvalidParameterError(f"nbar0 must be >= 0, got {self.nbar0}")
        if not 0.0 <= self.pump_p <= 1.0:
            raise InvalidParameterError(f"pump_p must lie in [0, 1], got {self.pump_p}")
        if int(self.cutoff) != self.cutoff or self.cutoff < 2:
            raise InvalidDimensionError(f"cutoff must be an integer >= 2, got {self.cutoff}")

        ratio = self.delta_t / self.channel.tau
        if ratio < MIN_DELTA_T_OVER_TAU:
            raise InvalidParameterError(
                f"delta_t must be >= {MIN_DELTA_T_OVER_TAU:g} tau (got {ratio:.3g} tau)"
            )
        if ratio < WARN_DELTA_T_OVER_TAU:
            logger.warning("delta_t = %.3g tau is short for the coarse-grained maser model", ratio)

        if self.phase_locked and not self.is_phase_matched():
            logger.warning(
                "tau + delta_t = %.6g is not a multiple of 2*pi; phase-locked frame is an approximation",
                self.channel.tau + self.delta_t,
            )

    @property
    def injection_rate(self) -> float:
        """r = 1/delta_t."""
        return 1.0 / self.delta_t

    @property
    def tau(self) -> float:
        return self.channel.tau

    @property
    def lam(self) -> float:
        return self.channel.lam

    def is_phase_matched(self, tol: float = 1e-9) -> bool:
        """True if one injection cycle is a whole number of oscillator periods."""
        cycles = (self.channel.tau + self.delta_t) / (2.0 * math.pi)
        return abs(cycles - round(cycles)) < tol

    def with_channel(self, channel: GainChannel) -> 'MaserConfig':
        return replace(self, channel=channel)

    def with_cutoff(self, cutoff: int) -> 'MaserConfig':
        return replace(self, cutoff=cutoff)

    def to_dict(self) -> dict:
        """Convert to dictionary."""
        return {
            'channel': self.channel.to_dict(),
            'kappa': self.kappa,
            'nbar0': self.nbar0,
            'delta_t': self.delta_t,
            'injection_rate': self.injection_rate,
            'pump_p': self.pump_p,
            'cutoff': self.cutoff,
            'phase_locked': self.phase_locked,
            'omega_m_hz': self.omega_m_hz,
            'lambda0_hz': self.lambda0_hz,
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'MaserConfig':
        """Create from dictionary."""
        return cls(
            channel=GainChannel.from_dict(data['channel']),
            kappa=data['kappa'],
            nbar0=data['nbar0'],
            delta_t=data['delta_t'],
            pump_p=data.get('pump_p', 0.0),
            cutoff=data.get('cutoff', DEFAULT_CUTOFF),
            phase_locked=data.get('phase_locked', True),
            omega_m_hz=data.get('omega_m_hz'),
            lambda0_hz=data.get('lambda0_hz'),
        )
