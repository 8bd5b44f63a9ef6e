"""Writes a ResultBundle: one CSV per table or time series plus a checksummed summary.json."""

import hashlib
import io
import json
import logging
import math
import shutil
import tempfile
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from constants import CSV_SIGNIFICANT_DIGITS, SERIES_COLUMNS, SUMMARY_FILE
from errors import OutputError
from models.scenario import OutputKind
from services.scenario_runner import ResultBundle, Table

logger = logging.getLogger(__name__)

CSV_FORMAT = f"%.{CSV_SIGNIFICANT_DIGITS}g"
SERIES_OUTPUTS = {OutputKind.MEAN_PHONONS, OutputKind.G2}


def _checksum(text: str) -> str:
    """SHA256 checksum of a file body."""
    return hashlib.sha256(text.encode('utf-8')).hexdigest()


def csv_body(columns: List[str], rows: np.ndarray) -> str:
    """Comma separated, header row, LF line endings."""
    buffer = io.StringIO()
    data = np.asarray(rows, dtype=float).reshape(-1, len(columns))
    np.savetxt(buffer, data, fmt=CSV_FORMAT, delimiter=',', header=','.join(columns),
               comments='', newline='\n')
    return buffer.getvalue()


def series_table(bundle: ResultBundle, label: str) -> Table:
    series = bundle.series[label]
    analytic = bundle.analytic.get(label, {})
    nan = [float('nan')] * len(series)
    rows = np.column_stack([
        series.times,
        series.mean_phonons,
        analytic.get('mean_phonons', nan),
        series.g2_zero,
        analytic.get('g2', nan),
        series.trace_drift,
    ])
    return Table(list(SERIES_COLUMNS), rows)


def _json_safe(value):
    """Replace NaN/inf by None so that summary.json stays strict JSON."""
    if isinstance(value, dict):
        return {str(k): _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def _files(bundle: ResultBundle) -> Dict[str, str]:
    files = {}
    wanted = set(bundle.spec.outputs)
    if wanted & SERIES_OUTPUTS:
        for label in bundle.series:
            files[f'series_{label}.csv'] = csv_body(*_unpack(series_table(bundle, label)))
    for name, table in bundle.tables.items():
        files[f'{name}.csv'] = csv_body(*_unpack(table))
    return files


def _unpack(table: Table):
    return table.columns, table.rows


def emit_outputs(bundle: ResultBundle, out_root: Path, log_entries: Optional[list] = None) -> Path:
    """
    Write every output of a run to out_root/<scenario name>/.

    The directory is assembled in a temporary sibling and moved into place
    only when everything was written, so a failed run leaves no partial output.

    Args:
        bundle: result of run_scenario
        out_root: output root directory
        log_entries: console log to store in the summary

    Returns:
        path of the scenario output directory

    Raises:
        OutputError: with the offending path
    """
    out_root = Path(out_root)
    target = out_root / bundle.spec.name
    try:
        out_root.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"cannot create output directory ({exc.strerror})", str(out_root)) from exc

    files = _files(bundle)
    summary = dict(bundle.summary)
    summary['files'] = {name: {'sha256': _checksum(body)} for name, body in sorted(files.items())}
    summary['log'] = list(log_entries or [])
    summary_text = json.dumps(_json_safe(summary), indent=2, sort_keys=True, ensure_ascii=False) + '\n'

    staging = Path(tempfile.mkdtemp(prefix=f'.{bundle.spec.name}.', dir=out_root))
    current = staging
    try:
        for name, body in files.items():
            current = staging / name
            with open(current, 'w', encoding='utf-8', newline='\n') as handle:
                handle.write(body)
        current = staging / SUMMARY_FILE
        with open(current, 'w', encoding='utf-8', newline='\n') as handle:
            handle.write(summary_text)
        current = target
        if target.exists():
            shutil.rmtree(target)
        staging.rename(target)
    except OSError as exc:
        shutil.rmtree(staging, ignore_errors=True)
        raise OutputError(f"writing results failed ({exc.strerror})", str(current)) from exc

    logger.info("wrote %d files to %s", len(files) + 1, target)
    return target


def load_summary(directory: Path) -> dict:
    """Read summary.json and verify the CSV checksums it lists."""
    directory = Path(directory)
    path = directory / SUMMARY_FILE
    try:
        with open(path, 'r', encoding='utf-8') as handle:
            summary = json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise OutputError(f"cannot read summary ({exc})", str(path)) from exc

    for name, meta in summary.get('files', {}).items():
        csv_path = directory / name
        try:
            body = csv_path.read_text(encoding='utf-8')
        except OSError as exc:
            raise OutputError("listed output file is missing", str(csv_path)) from exc
        if _checksum(body) != meta['sha256']:
            raise OutputError("checksum mismatch", str(csv_path))
    return summary
