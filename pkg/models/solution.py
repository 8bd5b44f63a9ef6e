"""Parameters of the analytic (closed-form) maser solution."""

from dataclasses import dataclass
from typing import Optional

from errors import InvalidParameterError
from models.config import MaserConfig


@dataclass(frozen=True)
class ClosedFormSolution:
    """
    Analytic state record.

    The drift amplitude is beta1(t) = (4 lam r amplification / kappa)(1 - exp(-kappa t / 2)).
    amplification is 1 for a bare displacement of 2*lam per spin (tau = pi,
    spin eigenstate or theta = pi/2 heralding); other channels rescale the kick
    by their first-order weak value.

    Attributes:
        lam, kappa, nbar0, r: as in MaserConfig
        epsilon: initial Gaussian width (defaults to nbar0, the thermal start)
        beta0: initial Gaussian center
        amplification: effective kick per spin in units of 2*lam
    """
    lam: float
    kappa: float
    nbar0: float
    r: float
    epsilon: Optional[float] = None
    beta0: complex = 0j
    amplification: float = 1.0

    def __post_init__(self):
        if not self.kappa > 0:
            raise InvalidParameterError(f"kappa must be > 0, got {self.kappa}")
        if self.nbar0 < 0:
            raise InvalidParameterError(f"nbar0 must be >= 0, got {self.nbar0}")
        if self.r < 0:
            raise InvalidParameterError(f"injection rate must be >= 0, got {self.r}")
        if self.epsilon is None:
            object.__setattr__(self, 'epsilon', self.nbar0)
        if not self.epsilon > 0 and self.nbar0 > 0:
            raise InvalidParameterError(f"epsilon must be > 0, got {self.epsilon}")

    @property
    def drift(self) -> float:
        """Effective 4*lambda*r of the Fokker-Planck drift."""
        return 4.0 * self.lam * self.r * self.amplification

    @classmethod
    def from_config(cls, config: MaserConfig, amplification: float = 1.0) -> 'ClosedFormSolution':
        """Thermal-start solution matching a MaserConfig."""
        return cls(
            lam=config.lam,
            kappa=config.kappa,
            nbar0=config.nbar0,
            r=config.injection_rate,
            amplification=amplification,
        )

    def to_dict(self) -> dict:
        """Convert to dictionary."""
        return {
            'lambda': self.lam,
            'kappa': self.kappa,
            'nbar0': self.nbar0,
            'r': self.r,
            'epsilon': self.epsilon,
            'beta0': [complex(self.beta0).real, complex(self.beta0).imag],
            'amplification': self.amplification,
        }
