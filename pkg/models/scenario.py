"""Scenario description for the experiment runner."""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional

from errors import ConfigError
from models.channel import GainChannel
from models.config import MaserConfig


class DiscreteMode(Enum):
    """How run_discrete treats the spin measurement record."""
    EXPECTED = "expected"  # deterministic channel map per spin
    SAMPLED = "sampled"    # draw one measurement outcome per spin


class OutputKind(Enum):
    """Requested scenario outputs."""
    MEAN_PHONONS = "mean_phonons"
    G2 = "g2"
    PN = "pn"
    WIGNER = "wigner"
    LINEWIDTH_SWEEP = "linewidth_sweep"
    PUMP_SWEEP = "pump_sweep"
    PS_SWEEP = "ps_sweep"


# Outputs that need a time-continuous (ODE) run.
ODE_ONLY_OUTPUTS = {OutputKind.PN, OutputKind.WIGNER}
DISCRETE_ONLY_OUTPUTS = {OutputKind.PS_SWEEP}


@dataclass
class ScenarioSpec:
    """
    One runnable scenario.

    Attributes:
        name: identifier, used for output file names
        config: base maser configuration (its channel is the primary curve)
        rho0_nbar0: occupancy of the thermal initial state (None = config.nbar0)
        t_end: ODE run length in 1/omega_m (exclusive with n_spins)
        n_spins: discrete run length (exclusive with t_end)
        outputs: requested outputs
        seed: RNG seed for sampled discrete runs
        discrete_mode: expected or sampled
        grid_points: samples of the ODE output grid
        wigner_points: points per axis of the Wigner grid
        comparisons: extra labelled channels run with the same parameters
        ps_grid: post-selection probabilities for the discrete P_S sweep
        eigen_targets: eigenstate steady states that fix kappa per sweep curve
        rate_grid: injection rates (relative to config) for the linewidth/pump sweeps
    """
    name: str
    config: MaserConfig
    rho0_nbar0: Optional[float] = None
    t_end: Optional[float] = None
    n_spins: Optional[int] = None
    outputs: List[OutputKind] = field(default_factory=list)
    seed: Optional[int] = None
    discrete_mode: DiscreteMode = DiscreteMode.EXPECTED
    grid_points: int = 400
    wigner_points: int = 41
    comparisons: Dict[str, GainChannel] = field(default_factory=dict)
    ps_grid: List[float] = field(default_factory=list)
    eigen_targets: List[float] = field(default_factory=list)
    rate_grid: List[float] = field(default_factory=list)

    def __post_init__(self):
        if not self.name or not self.name.replace('-', '').replace('_', '').isalnum():
            raise ConfigError(f"scenario name must be an identifier, got {self.name!r}")
        if (self.t_end is None) == (self.n_spins is None):
            raise ConfigError("scenario needs exactly one of t_end or n_spins")
        if self.t_end is not None and not self.t_end > 0:
            raise ConfigError(f"t_end must be > 0, got {self.t_end}")
        if self.n_spins is not None and self.n_spins < 0:
            raise ConfigError(f"n_spins must be >= 0, got {self.n_spins}")
        if self.grid_points < 2:
            raise ConfigError("grid_points must be >= 2")

        wanted = set(self.outputs)
        if self.is_discrete and wanted & ODE_ONLY_OUTPUTS:
            names = sorted(o.value for o in wanted & ODE_ONLY_OUTPUTS)
            raise ConfigError(f"outputs {names} need a t_end (ODE) run")
        if not self.is_discrete and wanted & DISCRETE_ONLY_OUTPUTS:
            raise ConfigError("ps_sweep needs an n_spins (discrete) run")
        if OutputKind.PS_SWEEP in wanted and not self.ps_grid:
            raise ConfigError("ps_sweep needs a non-empty PS_GRID")
        if self.discrete_mode == DiscreteMode.SAMPLED and self.seed is None:
            raise ConfigError("sampled discrete runs need a SEED")

    @property
    def is_discrete(self) -> bool:
        return self.n_spins is not None

    @property
    def initial_nbar0(self) -> float:
        return self.config.nbar0 if self.rho0_nbar0 is None else self.rho0_nbar0

    def to_dict(self) -> dict:
        """Convert to dictionary (full resolved parameter echo)."""
        return {
            'name': self.name,
            'config': self.config.to_dict(),
            'rho0': {'kind': 'thermal', 'nbar0': self.initial_nbar0},
            't_end': self.t_end,
            'n_spins': self.n_spins,
            'outputs': [o.value for o in self.outputs],
            'seed': self.seed,
            'discrete_mode': self.discrete_mode.value,
            'grid_points': self.grid_points,
            'wigner_points': self.wigner_points,
            'comparisons': {label: ch.to_dict() for label, ch in self.comparisons.items()},
            'ps_grid': list(self.ps_grid),
            'eigen_targets': list(self.eigen_targets),
            'rate_grid': list(self.rate_grid),
        }
