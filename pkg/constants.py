"""Numerical defaults, tolerances and output format constants."""

import math

APP_NAME = "phononmaser"
APP_VERSION = "0.4.1"

# Fock space
DEFAULT_CUTOFF = 26
CUTOFF_PER_PHONON = 2.5  # guideline: cutoff >= 2.5 * expected steady-state phonons
MIN_DISPLACEMENT_PAD = 16
ORACLE_MAX_DIM = 64

# Tolerances
TRACE_TOL = 1e-12
HERMITIAN_TOL = 1e-12
EIGENVALUE_FLOOR = -1e-9
IMAG_RESIDUE_TOL = 1e-8
IMAG_RESIDUE_DISCARD = 1e-10
WIGNER_IMAG_TOL = 1e-8
ORACLE_TOL = 1e-8
LAGUERRE_CROSSCHECK_TOL = 1e-9
QUADRATURE_REL_TOL = 1e-9
SPIN_NORM_TOL = 1e-12

# Integrator
ODE_METHOD = "RK45"
ODE_RTOL = 1e-8
ODE_ATOL = 1e-10
DEFAULT_GRID_POINTS = 400

# Injection window (delta_t in units of tau)
MIN_DELTA_T_OVER_TAU = 10.0
WARN_DELTA_T_OVER_TAU = 30.0

# Steady-state detection for spin-by-spin curves
STEADY_WINDOW = 5
STEADY_BAND_TOL = 0.01

# Quadrature for the displaced-thermal number distribution
RADIAL_NODES = 200
ANGULAR_NODES = 128
GAUSSIAN_RADIUS_SIGMAS = 9.0

# Generating-function derivative (step and one Richardson level)
Q_DERIVATIVE_STEP = 1e-4

# Fokker-Planck residual: below this max|dP/dt| the solution counts as stationary
FP_NORMALIZATION_FLOOR = 1e-300

# Spin-oscillator interaction time (half a mechanical period)
TAU_DEFAULT = math.pi

# Output
CSV_SIGNIFICANT_DIGITS = 12
SUMMARY_FILE = "summary.json"
PN_FILE = "pn.csv"
WIGNER_FILE = "wigner.csv"
SERIES_COLUMNS = [
    "time",
    "mean_phonons_numeric",
    "mean_phonons_analytic",
    "g2_numeric",
    "g2_analytic",
    "trace_drift",
]

# Environment overrides (loaded from .env by main.py)
ENV_OUT_DIR = "PHONONMASER_OUT_DIR"
ENV_CUTOFF = "PHONONMASER_CUTOFF"
ENV_LOG_LEVEL = "PHONONMASER_LOG_LEVEL"
DEFAULT_OUT_DIR = "out"

# Exit codes
EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_NUMERIC_ERROR = 3
