"""
Trace Files

Each trace is a CSV with the fixed column order TRACE_COLUMNS plus a JSON header
sidecar. Files are written to a temporary file in the target directory and then
renamed, so readers never observe partial output. Floats use their shortest
round-trip representation, which keeps repeated runs byte-identical.
"""

import csv
import io
import json
import math
import os
import tempfile

import numpy as np

from src.constants import TRACE_COLUMNS
from src.federation import RunTrace


def format_value(value) -> str:
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return "nan"
    return repr(value)


def trace_rows(trace: RunTrace) -> list[dict]:
    """RunTrace rows as dicts keyed by TRACE_COLUMNS (cumulative uploads added)."""
    rows, cumulative = [], 0
    for metrics in trace.rows:
        cumulative += metrics.scalars_up
        rows.append(
            {
                "round": metrics.round,
                "loss": metrics.loss,
                "optimal_gap": metrics.optimal_gap,
                "grad_norm": metrics.grad_norm,
                "decrement": metrics.decrement,
                "step_size": metrics.step_size,
                "sketch_size": metrics.sketch_size,
                "scalars_up": metrics.scalars_up,
                "scalars_down": metrics.scalars_down,
                "cumulative_up": cumulative,
                "test_accuracy": metrics.test_accuracy,
            }
        )
    return rows


def mean_rows(runs: list[list[dict]]) -> list[dict]:
    """
    Per-round mean over runs. A run that ended early (FedNDES exit) contributes
    its final row to every later round.
    """
    length = max(len(rows) for rows in runs)
    averaged = []
    for t in range(length):
        at_t = [rows[min(t, len(rows) - 1)] for rows in runs]
        row = {"round": t}
        for column in TRACE_COLUMNS[1:]:
            row[column] = float(np.mean([r[column] for r in at_t]))
        averaged.append(row)
    return averaged


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise


def write_csv(path: str, columns: list[str], rows: list[dict]) -> None:
    """Writes rows in the given column order (LF line endings)."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(row[column]) for column in columns])
    _atomic_write(path, buffer.getvalue())


def write_header(path: str, header: dict) -> None:
    _atomic_write(path, json.dumps(header, indent=2, sort_keys=True, allow_nan=False) + "\n")


def write_trace(stem: str, header: dict, rows: list[dict]) -> tuple[str, str]:
    """
    Writes ``<stem>.csv`` and ``<stem>.json``.

    Returns:
        (csv_path, header_path)
    """
    csv_path, header_path = f"{stem}.csv", f"{stem}.json"
    write_csv(csv_path, TRACE_COLUMNS, rows)
    write_header(header_path, header)
    return csv_path, header_path


def read_trace(csv_path: str) -> list[dict]:
    """Reads a trace CSV back into rows of floats (round as int)."""
    with open(csv_path, "r", encoding="utf-8", newline="") as f:
        rows = []
        for record in csv.DictReader(f):
            row = {column: float(record[column]) for column in TRACE_COLUMNS}
            row["round"] = int(record["round"])
            rows.append(row)
    return rows
