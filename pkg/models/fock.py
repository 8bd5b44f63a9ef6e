"""Operator and state models on a truncated Fock space."""

from dataclasses import dataclass
from typing import Dict

import numpy as np

from constants import EIGENVALUE_FLOOR, HERMITIAN_TOL, TRACE_TOL
from errors import ConsistencyError, InvalidDimensionError, NumericError


def _frozen_array(entries, dim: int) -> np.ndarray:
    """Copy entries into a read-only complex dim x dim array."""
    matrix = np.array(entries, dtype=complex)
    if matrix.shape != (dim, dim):
        raise InvalidDimensionError(
            f"expected a {dim}x{dim} matrix, got shape {matrix.shape}"
        )
    matrix.setflags(write=False)
    return matrix


@dataclass(frozen=True, eq=False)
class FockOperator:
    """Dense operator on states |0> .. |dim-1> (hbar = 1, time in 1/omega_m)."""
    dim: int
    entries: np.ndarray

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 2:
            raise InvalidDimensionError(f"Fock dimension must be >= 2, got {self.dim}")
        object.__setattr__(self, 'entries', _frozen_array(self.entries, self.dim))

    def adjoint(self) -> 'FockOperator':
        """Hermitian conjugate."""
        return FockOperator(self.dim, self.entries.conj().T)

    def __matmul__(self, other):
        if isinstance(other, FockOperator):
            if other.dim != self.dim:
                raise InvalidDimensionError(
                    f"cannot multiply operators of dim {self.dim} and {other.dim}"
                )
            return FockOperator(self.dim, self.entries @ other.entries)
        vector = np.asarray(other)
        if vector.shape[0] != self.dim:
            raise InvalidDimensionError(
                f"operator of dim {self.dim} applied to vector of length {vector.shape[0]}"
            )
        return self.entries @ vector

    def __add__(self, other: 'FockOperator') -> 'FockOperator':
        if other.dim != self.dim:
            raise InvalidDimensionError(f"cannot add operators of dim {self.dim} and {other.dim}")
        return FockOperator(self.dim, self.entries + other.entries)

    def __sub__(self, other: 'FockOperator') -> 'FockOperator':
        if other.dim != self.dim:
            raise InvalidDimensionError(f"cannot subtract operators of dim {self.dim} and {other.dim}")
        return FockOperator(self.dim, self.entries - other.entries)

    def scaled(self, factor: complex) -> 'FockOperator':
        return FockOperator(self.dim, factor * self.entries)

    @classmethod
    def identity(cls, dim: int) -> 'FockOperator':
        return cls(dim, np.eye(dim, dtype=complex))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """
    Hermitian, unit-trace, positive state of the oscillator (or a joint system).

    Use ``DensityMatrix.from_matrix`` to build one from raw numbers: it
    hermitizes, renormalizes and checks positivity.
    """
    dim: int
    entries: np.ndarray

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 2:
            raise InvalidDimensionError(f"density matrix dimension must be >= 2, got {self.dim}")
        object.__setattr__(self, 'entries', _frozen_array(self.entries, self.dim))

    @classmethod
    def from_matrix(cls, matrix, strict: bool = True) -> 'DensityMatrix':
        """
        Build a valid state from a raw matrix.

        Args:
            matrix: square complex array, approximately Hermitian with positive trace
            strict: raise ConsistencyError when the minimum eigenvalue is below the floor

        Returns:
            DensityMatrix with trace 1 and exact Hermiticity
        """
        matrix = np.asarray(matrix, dtype=complex)
        if not np.all(np.isfinite(matrix)):
            raise NumericError("density matrix has non-finite entries")

        scale = max(np.max(np.abs(matrix)), 1e-300)
        skew = np.max(np.abs(matrix - matrix.conj().T)) / scale
        if skew > 1e-9:
            raise ConsistencyError(f"matrix is not Hermitian (relative deviation {skew:.3e})")
        matrix = 0.5 * (matrix + matrix.conj().T)

        trace = np.trace(matrix).real
        if trace <= 0:
            raise ConsistencyError(f"matrix has non-positive trace {trace:.3e}")
        state = cls(matrix.shape[0], matrix / trace)

        if strict:
            lowest = state.min_eigenvalue()
            if lowest < EIGENVALUE_FLOOR:
                raise ConsistencyError(f"state is not positive (minimum eigenvalue {lowest:.3e})")
        return state

    def trace(self) -> complex:
        return np.trace(self.entries)

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.entries)[0])

    def purity(self) -> float:
        return float(np.real(np.trace(self.entries @ self.entries)))

    def invariant_report(self) -> Dict[str, float]:
        """Trace, Hermiticity and positivity figures for invariant checks."""
        return {
            'trace_error': float(abs(self.trace() - 1.0)),
            'hermitian_error': float(np.max(np.abs(self.entries - self.entries.conj().T))),
            'min_eigenvalue': self.min_eigenvalue(),
        }

    def satisfies_invariants(self) -> bool:
        report = self.invariant_report()
        return (
            report['trace_error'] <= TRACE_TOL
            and report['hermitian_error'] <= HERMITIAN_TOL
            and report['min_eigenvalue'] >= EIGENVALUE_FLOOR
        )
