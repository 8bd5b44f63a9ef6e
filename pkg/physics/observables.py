"""Physical quantities extracted from oscillator density matrices."""

import logging
import math
from typing import Iterable

import numpy as np
from scipy.stats import poisson

from constants import EIGENVALUE_FLOOR, IMAG_RESIDUE_DISCARD, IMAG_RESIDUE_TOL, WIGNER_IMAG_TOL
from errors import ConsistencyError, DomainError
from models.fock import DensityMatrix
from physics.fock_core import annihilation_matrix, displacement_pad, embed, expm_array, parity

logger = logging.getLogger(__name__)


def _real_expectation(value: complex, name: str) -> float:
    if abs(value.imag) > IMAG_RESIDUE_TOL:
        raise ConsistencyError(f"{name} has imaginary residue {value.imag:.3e}")
    if abs(value.imag) > IMAG_RESIDUE_DISCARD:
        logger.debug("%s imaginary residue %.3e discarded", name, value.imag)
    return float(value.real)


def mean_phonons(rho: DensityMatrix) -> float:
    """Tr(n rho)."""
    n = np.arange(rho.dim)
    return _real_expectation(complex(np.sum(n * np.diag(rho.entries))), "mean phonon number")


def number_distribution(rho: DensityMatrix) -> np.ndarray:
    """Diagonal of rho, small negative entries (>= -1e-9) clamped to zero."""
    probs = np.real(np.diag(rho.entries)).copy()
    lowest = probs.min()
    if lowest < EIGENVALUE_FLOOR:
        logger.warning("occupation probability %.3e below the truncation floor", lowest)
    if lowest < 0:
        logger.debug("clamped %d negative occupation(s), smallest %.3e", int(np.sum(probs < 0)), lowest)
        probs = np.clip(probs, 0.0, None)
    return probs


def g2_zero_numeric(rho: DensityMatrix) -> float:
    """Tr(b+ b+ b b rho) / Tr(b+ b rho)^2 = <n(n-1)>/<n>^2."""
    mean = mean_phonons(rho)
    if mean <= 0:
        raise DomainError("g2(0) is undefined for a state with zero mean phonon number")
    n = np.arange(rho.dim)
    second = _real_expectation(complex(np.sum(n * (n - 1) * np.diag(rho.entries))), "<n(n-1)>")
    return second / mean ** 2


def poisson_distribution(mean: float, size: int) -> np.ndarray:
    return poisson.pmf(np.arange(size), mean)


def total_variation_distance(p: np.ndarray, q: np.ndarray) -> float:
    """0.5 * sum |p - q| over the common support."""
    size = max(len(p), len(q))
    p = np.pad(np.asarray(p, dtype=float), (0, size - len(p)))
    q = np.pad(np.asarray(q, dtype=float), (0, size - len(q)))
    return float(0.5 * np.sum(np.abs(p - q)))


def poisson_distance(rho: DensityMatrix) -> float:
    """TVD between the number distribution and the equal-mean Poisson."""
    probs = number_distribution(rho)
    return total_variation_distance(probs, poisson_distribution(mean_phonons(rho), rho.dim))


def wigner(rho: DensityMatrix, grid: Iterable[complex]) -> np.ndarray:
    """
    W(alpha) = (2/pi) Tr[D(-alpha) rho D(alpha) Parity] on the given points.

    rho is embedded in a padded space before displacing so the parity trace
    sees the full displaced state.

    Args:
        rho: oscillator state
        grid: complex phase-space points (any shape)

    Returns:
        real array with the shape of grid
    """
    points = np.asarray(list(grid) if not isinstance(grid, np.ndarray) else grid, dtype=complex)
    flat = points.ravel()
    if flat.size and np.max(np.abs(flat)) ** 2 > rho.dim / 4:
        logger.warning("Wigner grid reaches |alpha|^2 = %.3g > dim/4", np.max(np.abs(flat)) ** 2)

    reach = float(np.max(np.abs(flat))) if flat.size else 0.0
    big = rho.dim + displacement_pad(reach)
    b = annihilation_matrix(big)
    bdag = b.conj().T
    padded = embed(rho.entries, big)
    par = np.diag(parity(big).entries)

    values = np.empty(flat.size)
    for idx, alpha in enumerate(flat):
        d = expm_array(alpha * bdag - np.conj(alpha) * b)
        shifted = d.conj().T @ padded @ d
        w = (2.0 / math.pi) * np.sum(par * np.diag(shifted))
        if abs(w.imag) > WIGNER_IMAG_TOL:
            raise ConsistencyError(f"Wigner function has imaginary part {w.imag:.3e} at {alpha}")
        values[idx] = w.real
    return values.reshape(points.shape)


def square_grid(extent: float, points: int, center: complex = 0j) -> np.ndarray:
    """points x points grid of complex amplitudes, rows = imaginary part."""
    axis = np.linspace(-extent, extent, points)
    re, im = np.meshgrid(axis + center.real, axis + center.imag)
    return re + 1j * im
