"""Gain channel model: how each spin is measured after interacting."""

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from errors import InvalidParameterError
from models.spin import SpinVector


class ChannelMode(Enum):
    """Spin measurement channel."""
    HERALDED = "heralded"   # keep only successful post-selections
    FAILURES = "failures"   # post-selection with failures included
    TRACE = "trace"         # discard the spin (partial trace)


class FailureWeighting(Enum):
    """How the failures channel combines success and failure outcomes."""
    PROJECTOR = "projector"  # single spin operator P_S|f><f| + (1-P_S)|f_perp><f_perp|
    FIXED = "fixed"          # P_S-weighted mixture of normalized branches
    JOINT = "joint"          # state-dependent branch probabilities (equals tracing)


@dataclass(frozen=True)
class GainChannel:
    """
    Per-spin gain map parameters.

    Attributes:
        mode: measurement channel
        pre: pre-selected spin state
        post: post-selected spin state (None for TRACE)
        tau: interaction time in 1/omega_m
        lam: scaled coupling lambda0/omega_m
        failure_weighting: only used by FAILURES
    """
    mode: ChannelMode
    pre: SpinVector
    post: Optional[SpinVector]
    tau: float
    lam: float
    failure_weighting: FailureWeighting = FailureWeighting.PROJECTOR

    def __post_init__(self):
        if not self.tau > 0:
            raise InvalidParameterError(f"interaction time tau must be > 0, got {self.tau}")
        if not self.lam >= 0:
            raise InvalidParameterError(f"coupling lambda must be >= 0, got {self.lam}")
        if self.mode == ChannelMode.TRACE and self.post is not None:
            raise InvalidParameterError("spin tracing takes no post-selected state")
        if self.mode != ChannelMode.TRACE and self.post is None:
            raise InvalidParameterError(f"{self.mode.value} channel needs a post-selected state")

    @property
    def is_linear(self) -> bool:
        """True if the map is linear in rho (no state-dependent normalization)."""
        if self.mode == ChannelMode.TRACE:
            return True
        if self.mode == ChannelMode.FAILURES and self.failure_weighting == FailureWeighting.JOINT:
            return True
        return self.pre.is_sigma_z_eigenstate() or self.post.is_sigma_z_eigenstate()

    def to_dict(self) -> dict:
        """Convert to dictionary."""
        return {
            'mode': self.mode.value,
            'pre': self.pre.to_dict(),
            'post': self.post.to_dict() if self.post else None,
            'tau': self.tau,
            'lambda': self.lam,
            'failure_weighting': self.failure_weighting.value,
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'GainChannel':
        """Create from dictionary."""
        post = data.get('post')
        return cls(
            mode=ChannelMode(data['mode']),
            pre=SpinVector.from_dict(data['pre']),
            post=SpinVector.from_dict(post) if post else None,
            tau=data['tau'],
            lam=data['lambda'],
            failure_weighting=FailureWeighting(data.get('failure_weighting', 'projector')),
        )
