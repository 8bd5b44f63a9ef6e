"""Exception hierarchy for the phonon maser simulator."""

from typing import Optional


class PhononMaserError(Exception):
    """Base class for all simulator errors."""


class InvalidDimensionError(PhononMaserError, ValueError):
    """Fock dimension out of range or mismatched operands."""


class InvalidParameterError(PhononMaserError, ValueError):
    """Physical parameter outside its allowed range."""


class NumericError(PhononMaserError):
    """Non-finite numbers where finite ones are required."""


class DegeneratePostselectionError(PhononMaserError):
    """Post-selection has zero success probability."""


class StiffnessError(PhononMaserError):
    """Integrator step size collapsed."""

    def __init__(self, message: str, time_reached: float):
        super().__init__(f"{message} (time reached: {time_reached:.6g})")
        self.time_reached = time_reached


class PrecisionError(PhononMaserError):
    """Quadrature or series did not converge to the requested tolerance."""


class ConsistencyError(PhononMaserError):
    """A quantity that must be real or normalized is not."""


class DomainError(PhononMaserError, ValueError):
    """Quantity undefined for the given state (e.g. g2 of the vacuum)."""


class UnsupportedChannelError(PhononMaserError):
    """Operation requires a linear gain channel."""


class FactorizationViolationError(PhononMaserError):
    """Factored U(tau) disagrees with direct joint evolution."""


class ConfigError(PhononMaserError):
    """Scenario file or CLI configuration is invalid."""


class OutputError(PhononMaserError):
    """Writing results failed."""

    def __init__(self, message: str, path: Optional[str] = None):
        super().__init__(f"{message}: {path}" if path else message)
        self.path = path
