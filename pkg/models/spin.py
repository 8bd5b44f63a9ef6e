"""Spin pre-/post-selection state model."""

from dataclasses import dataclass

import numpy as np

from constants import SPIN_NORM_TOL
from errors import InvalidParameterError


@dataclass(frozen=True)
class SpinVector:
    """Normalized amplitude over {|up>, |down>} (sigma_z eigenbasis)."""
    up_amplitude: complex
    down_amplitude: complex
    scale: float = 1.0  # factor applied to the raw input to normalize it

    @classmethod
    def from_amplitudes(cls, up: complex, down: complex) -> 'SpinVector':
        """Normalize raw amplitudes, e.g. 0.4|up> + 0.6|down>."""
        norm = float(np.hypot(abs(up), abs(down)))
        if norm == 0.0:
            raise InvalidParameterError("spin amplitudes must not both be zero")
        return cls(complex(up) / norm, complex(down) / norm, 1.0 / norm)

    @classmethod
    def up(cls) -> 'SpinVector':
        return cls(1.0 + 0j, 0j)

    @classmethod
    def down(cls) -> 'SpinVector':
        return cls(0j, 1.0 + 0j)

    @classmethod
    def plus(cls) -> 'SpinVector':
        """(|up> + |down>)/sqrt(2)."""
        return cls.from_amplitudes(1.0, 1.0)

    def __post_init__(self):
        norm = abs(self.up_amplitude) ** 2 + abs(self.down_amplitude) ** 2
        if abs(norm - 1.0) > SPIN_NORM_TOL:
            raise InvalidParameterError(
                f"SpinVector must be normalized (norm^2 = {norm:.15f}); use from_amplitudes"
            )

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([self.up_amplitude, self.down_amplitude], dtype=complex)

    def projector(self) -> np.ndarray:
        vec = self.amplitudes
        return np.outer(vec, vec.conj())

    def orthogonal(self) -> 'SpinVector':
        """The state orthogonal to this one, -conj(down)|up> + conj(up)|down>."""
        return SpinVector(-np.conj(self.down_amplitude), np.conj(self.up_amplitude))

    def overlap(self, other: 'SpinVector') -> complex:
        """<other|self>."""
        return complex(np.vdot(other.amplitudes, self.amplitudes))

    def is_sigma_z_eigenstate(self) -> bool:
        return abs(self.up_amplitude) < 1e-15 or abs(self.down_amplitude) < 1e-15

    def to_dict(self) -> dict:
        """Convert to dictionary."""
        return {
            'up': [self.up_amplitude.real, self.up_amplitude.imag],
            'down': [self.down_amplitude.real, self.down_amplitude.imag],
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'SpinVector':
        """Create from dictionary."""
        return cls.from_amplitudes(complex(*data['up']), complex(*data['down']))
