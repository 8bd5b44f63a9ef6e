"""Truncated Fock space algebra: ladder operators, exponentials, displacements, states."""

import logging
import math
from functools import lru_cache
from typing import Tuple

import numpy as np
from scipy.linalg import expm

from constants import MIN_DISPLACEMENT_PAD
from errors import InvalidDimensionError, InvalidParameterError, NumericError
from models.fock import DensityMatrix, FockOperator

logger = logging.getLogger(__name__)


def _check_dim(dim: int) -> None:
    if int(dim) != dim or dim < 2:
        raise InvalidDimensionError(f"Fock dimension must be an integer >= 2, got {dim}")


def annihilation_matrix(dim: int) -> np.ndarray:
    """Raw b with sqrt(n) at (n-1, n)."""
    _check_dim(dim)
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex)


def ladder_operators(dim: int) -> Tuple[FockOperator, FockOperator, FockOperator]:
    """
    Build b, b^dagger and n = b^dagger b on dim Fock states.

    Args:
        dim: Fock cutoff N (states |0> .. |N-1>)

    Returns:
        (annihilation, creation, number)
    """
    annihilation = FockOperator(dim, annihilation_matrix(dim))
    creation = annihilation.adjoint()
    number = creation @ annihilation
    return annihilation, creation, number


def expm_array(matrix: np.ndarray) -> np.ndarray:
    """exp of a raw square array (scaling and squaring, Pade 13)."""
    matrix = np.asarray(matrix, dtype=complex)
    if not np.all(np.isfinite(matrix)):
        raise NumericError("matrix exponential of a matrix with non-finite entries")
    return expm(matrix)


def matrix_exp(operator: FockOperator) -> FockOperator:
    """Matrix exponential of a Fock operator."""
    return FockOperator(operator.dim, expm_array(operator.entries))


def displacement_pad(alpha: complex) -> int:
    return max(MIN_DISPLACEMENT_PAD, math.ceil(4 * abs(alpha)))


@lru_cache(maxsize=256)
def _displacement_entries(alpha: complex, dim: int) -> np.ndarray:
    big = dim + displacement_pad(alpha)
    b = annihilation_matrix(big)
    generator = alpha * b.conj().T - np.conj(alpha) * b
    full = expm_array(generator)
    block = full[:dim, :dim].copy()
    block.setflags(write=False)
    return block


def displacement(alpha: complex, dim: int) -> FockOperator:
    """
    D(alpha) = exp(alpha b^dagger - alpha* b) truncated to dim states.

    The exponential is taken on dim + max(16, ceil(4|alpha|)) states and cut
    back, so the truncation error stays in the discarded rows.
    """
    _check_dim(dim)
    alpha = complex(alpha)
    if abs(alpha) ** 2 > dim / 4:
        logger.warning("displacement |alpha|^2 = %.3g exceeds dim/4 = %.3g", abs(alpha) ** 2, dim / 4)
    return FockOperator(dim, _displacement_entries(alpha, dim))


def rotation(angle: float, dim: int) -> FockOperator:
    """exp(-i n angle), the free evolution over time `angle`."""
    _check_dim(dim)
    return FockOperator(dim, np.diag(np.exp(-1j * angle * np.arange(dim))))


def parity(dim: int) -> FockOperator:
    _check_dim(dim)
    return FockOperator(dim, np.diag((-1.0) ** np.arange(dim)).astype(complex))


def thermal_state(nbar0: float, dim: int) -> DensityMatrix:
    """
    Thermal state with geometric occupation p_n ~ (nbar0/(1+nbar0))^n.

    Args:
        nbar0: mean occupancy (>= 0)
        dim: Fock cutoff

    Returns:
        Diagonal DensityMatrix renormalized on the truncated space
    """
    _check_dim(dim)
    if not nbar0 >= 0:
        raise InvalidParameterError(f"thermal occupancy must be >= 0, got {nbar0}")
    if nbar0 == 0:
        probs = np.zeros(dim)
        probs[0] = 1.0
    else:
        ratio = nbar0 / (1.0 + nbar0)
        probs = (1.0 - ratio) * ratio ** np.arange(dim)
        probs /= probs.sum()
    return DensityMatrix(dim, np.diag(probs).astype(complex))


def fock_state(n: int, dim: int) -> DensityMatrix:
    _check_dim(dim)
    if not 0 <= n < dim:
        raise InvalidParameterError(f"Fock state |{n}> outside cutoff {dim}")
    matrix = np.zeros((dim, dim), dtype=complex)
    matrix[n, n] = 1.0
    return DensityMatrix(dim, matrix)


def coherent_state(alpha: complex, dim: int) -> DensityMatrix:
    """|alpha><alpha| = D(alpha)|0><0|D(alpha)^dagger, renormalized after truncation."""
    column = displacement(alpha, dim).entries[:, 0]
    return DensityMatrix.from_matrix(np.outer(column, column.conj()))


def displaced(rho: DensityMatrix, alpha: complex) -> DensityMatrix:
    """D(alpha) rho D(alpha)^dagger."""
    d = displacement(alpha, rho.dim).entries
    return DensityMatrix.from_matrix(d @ rho.entries @ d.conj().T)


def embed(matrix: np.ndarray, dim: int) -> np.ndarray:
    """Zero-pad a square matrix into the upper-left block of a dim x dim one."""
    matrix = np.asarray(matrix)
    size = matrix.shape[0]
    if size > dim:
        raise InvalidDimensionError(f"cannot embed dim {size} into dim {dim}")
    out = np.zeros((dim, dim), dtype=complex)
    out[:size, :size] = matrix
    return out
