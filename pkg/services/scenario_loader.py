"""Flat KEY=value scenario files (dotenv syntax) and the bundled figure scenarios."""

import logging
import math
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Union

from dotenv import dotenv_values

from constants import DEFAULT_CUTOFF, DEFAULT_GRID_POINTS, TAU_DEFAULT
from errors import ConfigError, PhononMaserError
from models.channel import ChannelMode, FailureWeighting, GainChannel
from models.config import MaserConfig
from models.scenario import DiscreteMode, OutputKind, ScenarioSpec
from models.spin import SpinVector
from physics.closed_form import kappa_for_eigen_steady_state
from physics.gain_channels import post_state_for_probability

logger = logging.getLogger(__name__)

SCENARIO_DIR = Path(__file__).resolve().parent.parent / 'scenarios'
SCENARIO_SUFFIX = '.env'

KNOWN_KEYS = {
    'NAME', 'DESCRIPTION',
    'CHANNEL', 'PRE_UP', 'PRE_DOWN', 'POST_UP', 'POST_DOWN', 'POST_PROBABILITY', 'FAILURE_WEIGHTING',
    'LAMBDA', 'TAU_OVER_PI', 'KAPPA', 'KAPPA_OVER_LAMBDA', 'NBAR0', 'DELTA_T', 'PUMP_P', 'CUTOFF',
    'PHASE_LOCKED', 'OMEGA_M_HZ', 'LAMBDA0_HZ',
    'RHO0_NBAR0', 'T_END', 'N_SPINS', 'OUTPUTS', 'SEED', 'DISCRETE_MODE', 'GRID_POINTS', 'WIGNER_POINTS',
    'COMPARE', 'PS_GRID', 'EIGEN_TARGETS', 'RATE_GRID',
}

# Comparison curves that reuse the scenario's spin states
COMPARISON_LABELS = ('heralded', 'failures', 'trace', 'eigen')


def _number(raw: Dict[str, str], key: str, default=None, kind=float):
    value = raw.get(key)
    if value is None or value.strip() == '':
        if default is None:
            return None
        return default
    try:
        return kind(value.strip())
    except ValueError as exc:
        raise ConfigError(f"{key}: cannot read {value!r} as {kind.__name__}") from exc


def _flag(raw: Dict[str, str], key: str, default: bool) -> bool:
    value = raw.get(key)
    if value is None or value.strip() == '':
        return default
    lowered = value.strip().lower()
    if lowered in ('1', 'true', 'yes', 'on'):
        return True
    if lowered in ('0', 'false', 'no', 'off'):
        return False
    raise ConfigError(f"{key}: expected true/false, got {value!r}")


def _list(raw: Dict[str, str], key: str, kind=float) -> list:
    value = raw.get(key)
    if not value or not value.strip():
        return []
    try:
        return [kind(item.strip()) for item in value.split(',') if item.strip()]
    except ValueError as exc:
        raise ConfigError(f"{key}: cannot read {value!r} as a list of {kind.__name__}") from exc


def _enum(enum_cls, raw: Dict[str, str], key: str, default):
    value = raw.get(key)
    if value is None or value.strip() == '':
        return default
    try:
        return enum_cls(value.strip().lower())
    except ValueError as exc:
        allowed = ', '.join(item.value for item in enum_cls)
        raise ConfigError(f"{key}: {value!r} is not one of {allowed}") from exc


def _spin(raw: Dict[str, str], prefix: str) -> Optional[SpinVector]:
    up = _number(raw, f'{prefix}_UP', kind=complex)
    down = _number(raw, f'{prefix}_DOWN', kind=complex)
    if up is None and down is None:
        return None
    return SpinVector.from_amplitudes(up or 0j, down or 0j)


def _channel(mode: ChannelMode, pre: SpinVector, post: Optional[SpinVector], tau: float, lam: float,
             weighting: FailureWeighting) -> GainChannel:
    return GainChannel(mode=mode, pre=pre, post=None if mode == ChannelMode.TRACE else post,
                       tau=tau, lam=lam, failure_weighting=weighting)


def comparison_channel(label: str, base: GainChannel) -> GainChannel:
    """Channel for one labelled comparison curve; 'eigen' traces a spin prepared in |up>."""
    if label == 'eigen':
        return GainChannel(mode=ChannelMode.TRACE, pre=SpinVector.up(), post=None, tau=base.tau, lam=base.lam)
    mode = ChannelMode(label)
    if mode != ChannelMode.TRACE and base.post is None:
        raise ConfigError(f"comparison {label!r} needs a post-selected state")
    return _channel(mode, base.pre, base.post, base.tau, base.lam, base.failure_weighting)


def build_scenario(raw: Mapping[str, Optional[str]], name: str, overrides: Optional[Dict[str, object]] = None) -> ScenarioSpec:
    """
    Resolve a flat key-value mapping into a ScenarioSpec.

    Args:
        raw: KEY -> string value (as read by dotenv_values)
        name: fallback scenario name (file stem)
        overrides: resolved CLI/environment values: cutoff, seed

    Returns:
        validated ScenarioSpec
    """
    overrides = overrides or {}
    values = {key.upper(): ('' if value is None else str(value)) for key, value in raw.items()}
    unknown = sorted(set(values) - KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"unknown scenario keys: {', '.join(unknown)}")

    try:
        tau = _number(values, 'TAU_OVER_PI', 1.0) * math.pi if 'TAU_OVER_PI' in values else TAU_DEFAULT
        lam = _number(values, 'LAMBDA')
        if lam is None:
            raise ConfigError("LAMBDA is required")
        kappa = _number(values, 'KAPPA')
        kappa_ratio = _number(values, 'KAPPA_OVER_LAMBDA')
        if kappa is not None and kappa_ratio is not None:
            raise ConfigError("give either KAPPA or KAPPA_OVER_LAMBDA, not both")
        if kappa is None and kappa_ratio is not None:
            kappa = kappa_ratio * lam

        mode = _enum(ChannelMode, values, 'CHANNEL', ChannelMode.HERALDED)
        weighting = _enum(FailureWeighting, values, 'FAILURE_WEIGHTING', FailureWeighting.PROJECTOR)
        pre = _spin(values, 'PRE') or SpinVector.plus()
        post = _spin(values, 'POST')
        probability = _number(values, 'POST_PROBABILITY')
        if probability is not None:
            if post is not None:
                raise ConfigError("give either POST_UP/POST_DOWN or POST_PROBABILITY, not both")
            post = post_state_for_probability(pre, probability)
        channel = _channel(mode, pre, post, tau, lam, weighting)

        delta_t = _number(values, 'DELTA_T')
        if delta_t is None:
            raise ConfigError("DELTA_T is required")
        cutoff = overrides.get('cutoff') or _number(values, 'CUTOFF', DEFAULT_CUTOFF, int)
        nbar0 = _number(values, 'NBAR0', 0.0)

        eigen_targets = _list(values, 'EIGEN_TARGETS')
        if kappa is None:
            if not eigen_targets:
                raise ConfigError("KAPPA, KAPPA_OVER_LAMBDA or EIGEN_TARGETS is required")
            kappa = kappa_for_eigen_steady_state(lam, 1.0 / (delta_t * tau), nbar0, eigen_targets[0])

        config = MaserConfig(
            channel=channel,
            kappa=kappa,
            nbar0=nbar0,
            delta_t=delta_t * tau,
            pump_p=_number(values, 'PUMP_P', 0.0),
            cutoff=cutoff,
            phase_locked=_flag(values, 'PHASE_LOCKED', True),
            omega_m_hz=_number(values, 'OMEGA_M_HZ'),
            lambda0_hz=_number(values, 'LAMBDA0_HZ'),
        )

        comparisons = {}
        for label in _list(values, 'COMPARE', str):
            if label not in COMPARISON_LABELS:
                raise ConfigError(f"COMPARE: unknown curve {label!r} (known: {', '.join(COMPARISON_LABELS)})")
            comparisons[label] = comparison_channel(label, channel)

        outputs = [_enum(OutputKind, {'OUTPUTS': item}, 'OUTPUTS', None) for item in _list(values, 'OUTPUTS', str)]
        t_end = _number(values, 'T_END')
        seed = overrides.get('seed')
        if seed is None:
            seed = _number(values, 'SEED', kind=int)

        return ScenarioSpec(
            name=values.get('NAME') or name,
            config=config,
            rho0_nbar0=_number(values, 'RHO0_NBAR0'),
            t_end=None if t_end is None else t_end * tau,
            n_spins=_number(values, 'N_SPINS', kind=int),
            outputs=outputs,
            seed=seed,
            discrete_mode=_enum(DiscreteMode, values, 'DISCRETE_MODE', DiscreteMode.EXPECTED),
            grid_points=_number(values, 'GRID_POINTS', DEFAULT_GRID_POINTS, int),
            wigner_points=_number(values, 'WIGNER_POINTS', 41, int),
            comparisons=comparisons,
            ps_grid=_list(values, 'PS_GRID'),
            eigen_targets=eigen_targets,
            rate_grid=_list(values, 'RATE_GRID'),
        )
    except ConfigError:
        raise
    except (PhononMaserError, ValueError) as exc:
        raise ConfigError(f"scenario {name!r}: {exc}") from exc


def list_scenarios() -> List[str]:
    """Names of the bundled scenarios."""
    return sorted(path.stem for path in SCENARIO_DIR.glob(f'*{SCENARIO_SUFFIX}'))


def scenario_path(name_or_path: Union[str, Path]) -> Path:
    """Bundled scenario by name, or an explicit file path."""
    candidate = Path(name_or_path)
    if candidate.suffix and candidate.exists():
        return candidate
    bundled = SCENARIO_DIR / f'{name_or_path}{SCENARIO_SUFFIX}'
    if bundled.exists():
        return bundled
    if candidate.exists():
        return candidate
    known = ', '.join(list_scenarios())
    raise ConfigError(f"no scenario {str(name_or_path)!r} (bundled: {known})")


def load_scenario(name_or_path: Union[str, Path], overrides: Optional[Dict[str, object]] = None) -> ScenarioSpec:
    """
    Read a scenario file.

    Args:
        name_or_path: bundled scenario name (fig2 ... fig5) or path to a KEY=value file
        overrides: cutoff / seed values that beat the file

    Returns:
        ScenarioSpec
    """
    path = scenario_path(name_or_path)
    logger.debug("loading scenario from %s", path)
    raw = dotenv_values(path)
    return build_scenario(raw, path.stem, overrides)
