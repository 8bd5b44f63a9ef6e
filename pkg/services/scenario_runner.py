"""Runs a ScenarioSpec: numerical curves, their analytic counterparts and sweeps."""

import logging
import math
from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import Dict, List, Optional, Tuple

import numpy as np
import scipy

from constants import APP_NAME, APP_VERSION, CUTOFF_PER_PHONON, EIGENVALUE_FLOOR
from errors import DegeneratePostselectionError, DomainError
from models.channel import ChannelMode, GainChannel
from models.config import MaserConfig
from models.scenario import OutputKind, ScenarioSpec
from models.series import TimeSeries
from models.solution import ClosedFormSolution
from models.spin import SpinVector
from physics.closed_form import (
    eigen_steady_state,
    g2_analytic,
    kappa_for_eigen_steady_state,
    linewidth_analytic,
    linewidth_sweep,
    mean_phonons_analytic,
    pn_analytic,
    pump_sweep,
    steady_state_phonons,
)
from physics.dynamics import (
    default_output_grid,
    integrate_ode,
    run_discrete,
    spins_to_steady_state,
    steady_state_plateau,
)
from physics.fock_core import thermal_state
from physics.gain_channels import (
    eta,
    first_order_amplification,
    post_state_for_probability,
    spin_overlap_probability,
    weak_value,
)
from physics.observables import (
    mean_phonons,
    number_distribution,
    poisson_distribution,
    square_grid,
    total_variation_distance,
    wigner,
)
from ui.terminal import Console

logger = logging.getLogger(__name__)

# Default multipliers of the scenario's injection rate for the linewidth / pump sweeps
DEFAULT_RATE_FACTORS = tuple(np.geomspace(0.1, 10.0, 21))


@dataclass
class Table:
    """A CSV table: header and rows."""
    columns: List[str]
    rows: np.ndarray


@dataclass
class ResultBundle:
    """Everything a scenario run produced, ready for emit_outputs."""
    spec: ScenarioSpec
    series: Dict[str, TimeSeries] = field(default_factory=dict)
    analytic: Dict[str, Dict[str, List[float]]] = field(default_factory=dict)
    tables: Dict[str, Table] = field(default_factory=dict)
    summary: dict = field(default_factory=dict)


def analytic_solution(channel: GainChannel, config: MaserConfig) -> ClosedFormSolution:
    """Closed-form counterpart of a channel: the 2*lam kick rescaled by the first-order weak value and |eta|/2."""
    amplification = first_order_amplification(channel) * abs(eta(channel.tau)) / 2.0
    return ClosedFormSolution.from_config(config.with_channel(channel), amplification=amplification)


def _analytic_curves(sol: ClosedFormSolution, times: List[float]) -> Dict[str, List[float]]:
    means, g2 = [], []
    for t in times:
        means.append(mean_phonons_analytic(sol, t))
        try:
            g2.append(g2_analytic(sol, t))
        except DomainError:
            g2.append(float('nan'))
    return {'mean_phonons': means, 'g2': g2}


def _channel_facts(channel: GainChannel) -> dict:
    facts = {
        'mode': channel.mode.value,
        'amplification': first_order_amplification(channel),
    }
    if channel.mode != ChannelMode.TRACE:
        ps = spin_overlap_probability(channel.pre, channel.post)
        facts['P_S'] = round(ps, 2)
        facts['P_S_exact'] = ps
        try:
            wv = weak_value(channel.pre, channel.post)
            facts['weak_value'] = [wv.real, wv.imag]
        except DegeneratePostselectionError:
            facts['weak_value'] = None
    return facts


def _series_facts(series: TimeSeries, sol: ClosedFormSolution) -> dict:
    t_final = series.times[-1]
    facts = {
        'final_time': t_final,
        'final_mean_phonons_numeric': series.final_mean,
        'final_mean_phonons_analytic': mean_phonons_analytic(sol, t_final),
        'steady_state_phonons_analytic': steady_state_phonons(sol),
        'final_g2_numeric': series.g2_zero[-1],
        'max_abs_trace_drift': float(np.max(np.abs(series.trace_drift))),
        'max_hermitian_error': float(np.max(series.hermitian_error)) if series.hermitian_error else 0.0,
        'min_eigenvalue': float(np.min(series.min_eigenvalue)) if series.min_eigenvalue else 0.0,
    }
    facts['positivity_ok'] = facts['min_eigenvalue'] >= EIGENVALUE_FLOOR
    try:
        facts['final_g2_analytic'] = g2_analytic(sol, t_final)
    except DomainError:
        facts['final_g2_analytic'] = None
    return facts


def _ps_point(args: Tuple[MaserConfig, SpinVector, float, float, int]) -> Tuple[list, TimeSeries]:
    """One P_S sweep point (top level so that Pool can pickle it)."""
    config, pre, probability, target, n_spins = args
    post = post_state_for_probability(pre, probability)
    kappa = kappa_for_eigen_steady_state(config.lam, config.injection_rate, config.nbar0, target)
    channel = GainChannel(ChannelMode.HERALDED, pre, post, config.tau, config.lam)
    point = MaserConfig(
        channel=channel, kappa=kappa, nbar0=config.nbar0, delta_t=config.delta_t,
        pump_p=config.pump_p, cutoff=config.cutoff, phase_locked=config.phase_locked,
    )
    rho0 = thermal_state(config.nbar0, config.cutoff)
    series = run_discrete(point, rho0, n_spins)
    plateau = steady_state_plateau(series)
    spins = spins_to_steady_state(series)
    row = [
        target,
        kappa,
        probability,
        weak_value(pre, post).real,
        plateau[1] if plateau else math.nan,
        math.nan if spins is None else spins,
    ]
    return row, series


class ScenarioRunner:
    """Executes one scenario and collects a ResultBundle."""

    def __init__(self, spec: ScenarioSpec, console: Optional[Console] = None, workers: int = 1):
        self.spec = spec
        self.console = console or Console(quiet=True)
        self.workers = max(1, int(workers))
        self.bundle = ResultBundle(spec=spec)

    def curves(self) -> Dict[str, GainChannel]:
        """Primary channel first, then the comparison curves."""
        primary = self.spec.config.channel
        out = {primary.mode.value: primary}
        for label, channel in self.spec.comparisons.items():
            out.setdefault(label, channel)
        return out

    def check_cutoff(self) -> None:
        """Warn when the Fock cutoff is tight for the expected steady state of a curve."""
        cutoff = self.spec.config.cutoff
        for label, channel in self.curves().items():
            expected = steady_state_phonons(analytic_solution(channel, self.spec.config))
            if math.isfinite(expected) and cutoff < CUTOFF_PER_PHONON * expected:
                logger.warning("curve %s: cutoff %d is below %g x %.4g expected phonons",
                               label, cutoff, CUTOFF_PER_PHONON, expected)
                self.console.add_log('warning', f"Kurve {label}: Cutoff {cutoff} knapp fuer n = {expected:.4g}")

    def _run_curve(self, label: str, channel: GainChannel) -> TimeSeries:
        spec = self.spec
        config = spec.config.with_channel(channel)
        rho0 = thermal_state(spec.initial_nbar0, config.cutoff)
        self.console.start_loading(f"Berechne Kurve '{label}' ...")
        try:
            if spec.is_discrete:
                return run_discrete(config, rho0, spec.n_spins, spec.discrete_mode, spec.seed)
            grid = default_output_grid(spec.t_end, spec.grid_points)
            return integrate_ode(config, rho0, spec.t_end, grid, keep_snapshots=False)
        finally:
            self.console.stop_loading()

    def run_curves(self) -> None:
        curves_summary = {}
        for label, channel in self.curves().items():
            series = self._run_curve(label, channel)
            sol = analytic_solution(channel, self.spec.config)
            self.bundle.series[label] = series
            self.bundle.analytic[label] = _analytic_curves(sol, series.times)
            facts = {**_channel_facts(channel), **_series_facts(series, sol)}
            curves_summary[label] = facts
            self.console.add_log(
                'success',
                f"Kurve {label}: n = {facts['final_mean_phonons_numeric']:.4g} numerisch, "
                f"{facts['steady_state_phonons_analytic']:.4g} analytisch (stationaer)",
            )
            self.console.add_log(
                'system',
                f"  Spur-Drift max {facts['max_abs_trace_drift']:.2e}, "
                f"kleinster Eigenwert {facts['min_eigenvalue']:.2e}",
                detail_level='verbose',
            )
            if not facts['positivity_ok']:
                self.console.add_log('warning', f"Kurve {label}: Zustand verletzt Positivitaet (Abschneidefehler?)")
        self.bundle.summary['curves'] = curves_summary
        primary = curves_summary[self.spec.config.channel.mode.value]
        for key in ('P_S', 'weak_value', 'steady_state_phonons_analytic', 'final_mean_phonons_numeric'):
            if key in primary:
                self.bundle.summary[key] = primary[key]

    def _primary(self) -> Tuple[str, TimeSeries, ClosedFormSolution]:
        channel = self.spec.config.channel
        label = channel.mode.value
        return label, self.bundle.series[label], analytic_solution(channel, self.spec.config)

    def number_distribution_tables(self) -> None:
        label, series, sol = self._primary()
        dim = self.spec.config.cutoff
        ns = np.arange(dim)
        final = series.final_state
        p_final = number_distribution(final)
        p_analytic = np.asarray(pn_analytic(sol, series.times[-1], ns))
        p_poisson = poisson_distribution(float(np.sum(ns * p_final)), dim)
        self.bundle.tables['pn'] = Table(
            ['n', 'p_numeric', 'p_analytic', 'p_poisson'],
            np.column_stack([ns, p_final, p_analytic, p_poisson]),
        )

        rho0 = thermal_state(self.spec.initial_nbar0, dim)
        initial_sol = ClosedFormSolution(sol.lam, sol.kappa, self.spec.initial_nbar0, sol.r)
        p0 = number_distribution(rho0)
        p0_analytic = np.asarray(pn_analytic(initial_sol, 0.0, ns))
        self.bundle.tables['pn_initial'] = Table(
            ['n', 'p_numeric', 'p_analytic', 'p_poisson'],
            np.column_stack([ns, p0, p0_analytic, poisson_distribution(float(np.sum(ns * p0)), dim)]),
        )
        self.bundle.summary['number_distribution'] = {
            'curve': label,
            'tvd_poisson': total_variation_distance(p_final, p_poisson),
            'tvd_analytic': total_variation_distance(p_final, p_analytic),
        }

    def wigner_table(self) -> None:
        _, series, _ = self._primary()
        state = series.final_state
        mean = mean_phonons(state)
        extent = max(2.5, 1.5 + 1.2 * math.sqrt(mean))
        grid = square_grid(extent, self.spec.wigner_points)
        self.console.start_loading("Berechne Wigner-Funktion ...")
        try:
            values = wigner(state, grid)
        finally:
            self.console.stop_loading()
        self.bundle.tables['wigner'] = Table(
            ['re_alpha', 'im_alpha', 'w'],
            np.column_stack([grid.real.ravel(), grid.imag.ravel(), values.ravel()]),
        )
        self.bundle.summary['wigner'] = {
            'extent': extent,
            'points': self.spec.wigner_points,
            'min': float(values.min()),
            'max': float(values.max()),
        }

    def rate_sweeps(self) -> None:
        _, _, sol = self._primary()
        factors = self.spec.rate_grid or DEFAULT_RATE_FACTORS
        rates = [factor * sol.r for factor in factors]
        if OutputKind.LINEWIDTH_SWEEP in self.spec.outputs:
            rows = linewidth_sweep(sol, rates)
            self.bundle.tables['linewidth_sweep'] = Table(['r2', 'linewidth'], rows)
            self.bundle.summary['linewidth_analytic'] = linewidth_analytic(sol)
        if OutputKind.PUMP_SWEEP in self.spec.outputs:
            rows = pump_sweep(sol, rates)
            self.bundle.tables['pump_sweep'] = Table(['r2', 'n_ss'], rows)

    def ps_sweep(self) -> None:
        spec = self.spec
        config = spec.config
        targets = spec.eigen_targets or [
            eigen_steady_state(config.lam, config.injection_rate, config.kappa, config.nbar0)
        ]
        jobs = [(config, config.channel.pre, p, target, spec.n_spins) for target in targets for p in spec.ps_grid]
        self.console.add_log('system', f"P_S-Sweep: {len(jobs)} Punkte, {self.workers} Prozess(e)")
        self.console.start_loading("P_S-Sweep laeuft ...")
        try:
            if self.workers > 1:
                with Pool(processes=self.workers) as pool:
                    results = pool.map(_ps_point, jobs)
            else:
                results = [_ps_point(job) for job in jobs]
        finally:
            self.console.stop_loading()

        rows = []
        for (_, _, probability, target, _), (row, series) in zip(jobs, results):
            rows.append(row)
            self.bundle.series[f"ps{probability:g}_eigen{target:g}"] = series
        self.bundle.tables['ps_sweep'] = Table(
            ['n_ss_eigen', 'kappa', 'p_s', 'weak_value', 'n_ss_numeric', 'spins_to_95pct'],
            np.array(rows, dtype=float),
        )

    def run(self) -> ResultBundle:
        spec = self.spec
        self.console.add_log('system', f"Starte Szenario '{spec.name}'")
        logger.info("scenario %s: %d curve(s), outputs %s", spec.name, len(self.curves()),
                    [o.value for o in spec.outputs])
        self.check_cutoff()
        self.run_curves()
        wanted = set(spec.outputs)
        if OutputKind.PN in wanted:
            self.number_distribution_tables()
        if OutputKind.WIGNER in wanted:
            self.wigner_table()
        if wanted & {OutputKind.LINEWIDTH_SWEEP, OutputKind.PUMP_SWEEP}:
            self.rate_sweeps()
        if OutputKind.PS_SWEEP in wanted:
            self.ps_sweep()

        self.bundle.summary.update({
            'scenario': spec.to_dict(),
            'seed': spec.seed,
            'versions': {
                APP_NAME: APP_VERSION,
                'numpy': np.__version__,
                'scipy': scipy.__version__,
            },
        })
        self.console.add_log('success', f"Szenario '{spec.name}' abgeschlossen")
        return self.bundle


def run_scenario(spec: ScenarioSpec, console: Optional[Console] = None, workers: int = 1) -> ResultBundle:
    """
    Run every curve of a scenario and compute the requested outputs.

    Args:
        spec: validated scenario
        console: progress reporting (silent if None)
        workers: processes for sweep points

    Returns:
        ResultBundle (nothing is written to disk, see emit_outputs)
    """
    return ScenarioRunner(spec, console, workers).run()
