"""
Analytic results of the coarse-grained maser: drift amplitude, mean phonons,
displaced-thermal number distribution, g2(0), linewidth and the Gaussian
Fokker-Planck solution family.
"""

import logging
import math
from typing import Iterable, Tuple, Union

import numpy as np
from scipy.special import eval_laguerre, gammaln

from constants import (
    ANGULAR_NODES,
    GAUSSIAN_RADIUS_SIGMAS,
    LAGUERRE_CROSSCHECK_TOL,
    QUADRATURE_REL_TOL,
    RADIAL_NODES,
)
from errors import DomainError, InvalidParameterError, PrecisionError
from models.solution import ClosedFormSolution

logger = logging.getLogger(__name__)

ArrayLike = Union[int, Iterable[int], np.ndarray]


def _decay(sol: ClosedFormSolution, t: float) -> float:
    if t < 0:
        raise InvalidParameterError(f"time must be >= 0, got {t}")
    if math.isinf(t):
        return 0.0
    return math.exp(-sol.kappa * t / 2.0)


def beta1_t(sol: ClosedFormSolution, t: float) -> float:
    """(4 lam r / kappa)(1 - exp(-kappa t / 2))."""
    return sol.drift / sol.kappa * (1.0 - _decay(sol, t))


def beta_bar(sol: ClosedFormSolution) -> float:
    """Steady-state drift amplitude, |beta_bar|^2 = n_SS - nbar0."""
    return sol.drift / sol.kappa


def steady_state_phonons(sol: ClosedFormSolution) -> float:
    """nbar0 + 16 lam^2 r^2 / kappa^2."""
    return sol.nbar0 + beta_bar(sol) ** 2


def mean_phonons_analytic(sol: ClosedFormSolution, t: float) -> float:
    """nbar0 + beta1(t)^2; t = inf gives the steady state."""
    return sol.nbar0 + beta1_t(sol, t) ** 2


def eigen_steady_state(lam: float, r: float, kappa: float, nbar0: float) -> float:
    """Steady state for a spin eigenstate (plain 2*lam kick per spin)."""
    return nbar0 + 16.0 * lam ** 2 * r ** 2 / kappa ** 2


def kappa_for_eigen_steady_state(lam: float, r: float, nbar0: float, target: float) -> float:
    """Damping rate at which the eigenstate steady state equals `target`."""
    if not target > nbar0:
        raise InvalidParameterError(f"target steady state {target} must exceed nbar0 = {nbar0}")
    return 4.0 * lam * r / math.sqrt(target - nbar0)


def _laguerre_pn(nbar0: float, amplitude: float, n: np.ndarray) -> np.ndarray:
    """Displaced thermal P(n) in closed form (log space, no cancellation)."""
    x = amplitude ** 2
    if nbar0 == 0:
        return np.exp(n * np.log(x) - x - gammaln(n + 1)) if x > 0 else (n == 0).astype(float)
    arg = -x / (nbar0 * (1.0 + nbar0))
    log_poly = np.log(eval_laguerre(n, arg))
    return np.exp(n * np.log(nbar0) - (n + 1) * np.log1p(nbar0) - x / (1.0 + nbar0) + log_poly)


def _quadrature_pn(nbar0: float, amplitude: float, n: np.ndarray, radial: int, angular: int) -> np.ndarray:
    """
    (1/(pi nbar0 n!)) int d^2beta |beta|^{2n} exp(-|beta|^2 - |beta - beta_bar|^2 / nbar0)

    Polar Gauss-Legendre grid centred on beta_bar, radius GAUSSIAN_RADIUS_SIGMAS * sqrt(nbar0).
    """
    radius = GAUSSIAN_RADIUS_SIGMAS * math.sqrt(nbar0)
    xr, wr = np.polynomial.legendre.leggauss(radial)
    xa, wa = np.polynomial.legendre.leggauss(angular)
    rho = 0.5 * radius * (xr + 1.0)
    w_rho = 0.5 * radius * wr
    phi = math.pi * (xa + 1.0)
    w_phi = math.pi * wa

    beta = amplitude + rho[:, None] * np.exp(1j * phi[None, :])
    mod2 = np.abs(beta) ** 2
    log_mod2 = np.log(np.maximum(mod2, 1e-300))
    weights = (w_rho * rho)[:, None] * w_phi[None, :]
    gauss = -rho[:, None] ** 2 / nbar0 - mod2

    out = np.empty(n.shape, dtype=float)
    for idx, k in enumerate(n):
        log_integrand = k * log_mod2 + gauss - gammaln(k + 1)
        out[idx] = np.sum(weights * np.exp(log_integrand)) / (math.pi * nbar0)
    return out


def pn_analytic(sol: ClosedFormSolution, t: float, n: ArrayLike) -> Union[float, np.ndarray]:
    """
    Phonon number distribution of the displaced thermal state at beta1(t).

    Evaluated by polar quadrature, checked against node doubling and against
    the Laguerre closed form.

    Args:
        sol: analytic parameters
        t: time (inf for the steady state)
        n: phonon number or array of phonon numbers

    Returns:
        P(n), same shape as n
    """
    scalar = np.isscalar(n)
    ns = np.atleast_1d(np.asarray(n, dtype=int))
    if np.any(ns < 0):
        raise InvalidParameterError("phonon numbers must be >= 0")
    amplitude = beta1_t(sol, t)

    closed = _laguerre_pn(sol.nbar0, amplitude, ns)
    if sol.nbar0 == 0:
        return float(closed[0]) if scalar else closed

    coarse = _quadrature_pn(sol.nbar0, amplitude, ns, RADIAL_NODES, ANGULAR_NODES)
    fine = _quadrature_pn(sol.nbar0, amplitude, ns, 2 * RADIAL_NODES, 2 * ANGULAR_NODES)
    change = np.abs(fine - coarse)
    if np.any(change > QUADRATURE_REL_TOL * np.abs(fine) + 1e-15):
        worst = int(ns[np.argmax(change)])
        raise PrecisionError(f"P(n) quadrature did not converge at n = {worst}")
    gap = np.max(np.abs(fine - closed))
    if gap > LAGUERRE_CROSSCHECK_TOL:
        raise PrecisionError(f"P(n) quadrature and Laguerre form disagree by {gap:.3e}")

    return float(fine[0]) if scalar else fine


def default_n_max(sol: ClosedFormSolution) -> int:
    """Series truncation 10 + 10 n_SS."""
    return int(math.ceil(10 + 10 * steady_state_phonons(sol)))


def g2_analytic(sol: ClosedFormSolution, t: float) -> float:
    """(2 n0^2 + 4 b^2 n0 + b^4) / (n0^2 + 2 b^2 n0 + b^4) with b = beta1(t)."""
    b2 = beta1_t(sol, t) ** 2
    n0 = sol.nbar0
    denominator = n0 ** 2 + 2 * b2 * n0 + b2 ** 2
    if denominator <= 0:
        raise DomainError("g2(0) is undefined for the vacuum (nbar0 = 0 and beta1 = 0)")
    return (2 * n0 ** 2 + 4 * b2 * n0 + b2 ** 2) / denominator


def linewidth_analytic(sol: ClosedFormSolution) -> float:
    """Phase-diffusion linewidth kappa nbar0 / (2 n_SS)."""
    n_ss = steady_state_phonons(sol)
    if n_ss <= 0:
        raise DomainError("linewidth needs a positive steady-state phonon number")
    return sol.kappa * sol.nbar0 / (2.0 * n_ss)


def fp_coefficients(sol: ClosedFormSolution, t: float) -> Tuple[complex, complex, float]:
    """
    Coefficients of P = exp[a + b beta + c beta* + d beta beta*].

    b = c = (4 lam r / (kappa nbar0))(1 - e^{-kappa t/2}) + (beta0/nbar0) e^{-kappa t/2}
    d = -1 / (nbar0 (1 - e^{-kappa t}) + epsilon e^{-kappa t})
    """
    if sol.nbar0 <= 0:
        raise DomainError("Fokker-Planck Gaussian needs nbar0 > 0")
    half = _decay(sol, t)
    full = half ** 2
    b = sol.drift / (sol.kappa * sol.nbar0) * (1.0 - half) + sol.beta0 / sol.nbar0 * half
    d = -1.0 / (sol.nbar0 * (1.0 - full) + sol.epsilon * full)
    return complex(b), complex(b), float(d)


def fp_normalization(b: complex, c: complex, d: float) -> float:
    """a(t) from unit normalization of the Gaussian: a = ln(-d/pi) + b c / d."""
    return float(np.real(math.log(-d / math.pi) + b * c / d))


def linewidth_sweep(sol: ClosedFormSolution, rates: Iterable[float]) -> np.ndarray:
    """Rows (r^2, linewidth) for a set of injection rates."""
    rows = []
    for r in rates:
        point = ClosedFormSolution(sol.lam, sol.kappa, sol.nbar0, r, amplification=sol.amplification)
        rows.append((r ** 2, linewidth_analytic(point)))
    return np.array(rows)


def pump_sweep(sol: ClosedFormSolution, rates: Iterable[float]) -> np.ndarray:
    """Rows (r^2, n_SS) for a set of injection rates."""
    rows = []
    for r in rates:
        point = ClosedFormSolution(sol.lam, sol.kappa, sol.nbar0, r, amplification=sol.amplification)
        rows.append((r ** 2, steady_state_phonons(point)))
    return np.array(rows)
