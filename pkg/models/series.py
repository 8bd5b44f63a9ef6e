"""Sampled observables of a run."""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from errors import ConsistencyError
from models.fock import DensityMatrix


@dataclass
class TimeSeries:
    """Observables sampled along a trajectory (times in 1/omega_m)."""
    times: List[float]
    mean_phonons: List[float]
    g2_zero: List[float]
    trace_drift: List[float]
    hermitian_error: List[float] = field(default_factory=list)
    min_eigenvalue: List[float] = field(default_factory=list)
    snapshots: List[Tuple[float, DensityMatrix]] = field(default_factory=list)

    def __post_init__(self):
        n = len(self.times)
        for name in ('mean_phonons', 'g2_zero', 'trace_drift'):
            if len(getattr(self, name)) != n:
                raise ConsistencyError(f"TimeSeries.{name} has {len(getattr(self, name))} entries, expected {n}")
        for name in ('hermitian_error', 'min_eigenvalue'):
            values = getattr(self, name)
            if values and len(values) != n:
                raise ConsistencyError(f"TimeSeries.{name} has {len(values)} entries, expected {n}")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ConsistencyError("TimeSeries times must be strictly increasing")

    def __len__(self) -> int:
        return len(self.times)

    @property
    def final_state(self) -> Optional[DensityMatrix]:
        return self.snapshots[-1][1] if self.snapshots else None

    @property
    def final_mean(self) -> float:
        return self.mean_phonons[-1]
