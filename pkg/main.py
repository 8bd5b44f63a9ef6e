"""Command line entry point: run scenarios, verify the numerics, list bundled scenarios."""

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional

from dotenv import load_dotenv

from constants import (
    APP_NAME,
    APP_VERSION,
    DEFAULT_OUT_DIR,
    ENV_CUTOFF,
    ENV_LOG_LEVEL,
    ENV_OUT_DIR,
    EXIT_CONFIG_ERROR,
    EXIT_NUMERIC_ERROR,
    EXIT_OK,
)
from errors import ConfigError, InvalidDimensionError, InvalidParameterError, PhononMaserError
from services.output_writer import emit_outputs
from services.scenario_loader import list_scenarios, load_scenario
from services.scenario_runner import run_scenario
from services.verification import run_verification
from ui.terminal import Console

logger = logging.getLogger(APP_NAME)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=APP_NAME,
        description="Phonon maser: spin-pumped mechanical oscillator with post-selected spins",
    )
    parser.add_argument('--version', action='version', version=f'{APP_NAME} {APP_VERSION}')
    parser.add_argument('-q', '--quiet', action='store_true', help='no console output')
    parser.add_argument('-v', '--verbose', action='store_true', help='show verbose log entries')
    sub = parser.add_subparsers(dest='command', required=True)

    run = sub.add_parser('run', help='run a bundled scenario or a scenario file')
    run.add_argument('scenario', help='scenario name (see list-scenarios) or path to a KEY=value file')
    run.add_argument('--out', type=Path, default=None, help=f'output root (default ${ENV_OUT_DIR} or ./{DEFAULT_OUT_DIR})')
    run.add_argument('--cutoff', type=int, default=None, help='Fock cutoff, overrides the scenario')
    run.add_argument('--seed', type=int, default=None, help='RNG seed for sampled runs')
    run.add_argument('--workers', type=int, default=1, help='processes for sweep points')

    verify = sub.add_parser('verify', help='run the oracle checks')
    verify.add_argument('--dim', type=int, default=40, help='Fock dimension of the joint-evolution check (<= 64)')

    sub.add_parser('list-scenarios', help='list bundled scenarios')
    return parser


def configure_logging() -> None:
    level_name = os.environ.get(ENV_LOG_LEVEL, 'WARNING').upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level, format='%(asctime)s %(levelname)s %(name)s: %(message)s')


def resolve_overrides(args: argparse.Namespace) -> dict:
    """CLI flags beat environment variables."""
    cutoff = args.cutoff
    if cutoff is None and os.environ.get(ENV_CUTOFF):
        try:
            cutoff = int(os.environ[ENV_CUTOFF])
        except ValueError as exc:
            raise ConfigError(f"{ENV_CUTOFF} must be an integer, got {os.environ[ENV_CUTOFF]!r}") from exc
    return {'cutoff': cutoff, 'seed': args.seed}


def command_run(args: argparse.Namespace, console: Console) -> int:
    spec = load_scenario(args.scenario, resolve_overrides(args))
    out_root = args.out or Path(os.environ.get(ENV_OUT_DIR, DEFAULT_OUT_DIR))
    console.banner(f"{APP_NAME} {APP_VERSION} - Szenario {spec.name}")
    bundle = run_scenario(spec, console, workers=args.workers)
    target = emit_outputs(bundle, out_root, console.entries())
    console.add_log('success', f"Ergebnisse geschrieben nach {target}")
    return EXIT_OK


def command_verify(args: argparse.Namespace, console: Console) -> int:
    console.banner(f"{APP_NAME} {APP_VERSION} - Verifikation")
    results = run_verification(args.dim, console)
    failed = [r for r in results if not r.passed]
    if failed:
        console.add_log('error', f"{len(failed)} von {len(results)} Pruefungen fehlgeschlagen")
        return EXIT_NUMERIC_ERROR
    console.add_log('success', f"Alle {len(results)} Pruefungen bestanden")
    return EXIT_OK


def command_list(console: Console) -> int:
    for name in list_scenarios():
        print(name)
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point; returns the process exit code."""
    load_dotenv()
    configure_logging()
    args = build_parser().parse_args(argv)
    console = Console(quiet=args.quiet, verbose=args.verbose)

    try:
        if args.command == 'run':
            return command_run(args, console)
        if args.command == 'verify':
            return command_verify(args, console)
        return command_list(console)
    except (ConfigError, InvalidParameterError, InvalidDimensionError) as exc:
        console.add_log('error', f"Konfigurationsfehler: {exc}")
        return EXIT_CONFIG_ERROR
    except PhononMaserError as exc:
        logger.debug("run failed", exc_info=True)
        console.add_log('error', f"Numerischer Fehler: {exc}")
        return EXIT_NUMERIC_ERROR
    except KeyboardInterrupt:
        console.stop_loading()
        console.add_log('warning', "Abgebrochen.")
        return EXIT_NUMERIC_ERROR


if __name__ == "__main__":
    sys.exit(main())
