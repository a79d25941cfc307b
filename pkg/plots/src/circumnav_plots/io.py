"""CSV log loading with schema validation.

Reads the documented circumnav log schemas only; never recomputes
estimates and never imports the simulation package.
"""

from __future__ import annotations

import csv
from pathlib import Path


class PlotSchemaError(Exception):
    """A log file does not match the documented schema; names the column."""

    def __init__(self, column: str, message: str = ""):
        self.column = column
        super().__init__(message or f"missing column: {column}")


class EmptyDataError(Exception):
    """A log file holds no data rows."""


SCHEMAS = {
    "world.csv": ["k", "t", "entity", "px", "py", "vx", "vy", "psi", "alive"],
    "relative.csv": ["k", "t", "pair", "kind", "phat_x", "phat_y", "vhat_x",
                     "vhat_y", "true_px", "true_py", "err", "trace_p"],
    "target.csv": ["k", "t", "agent", "mode", "meas_err", "est_err", "trace_p"],
    "controller.csv": ["k", "t", "agent", "theta", "pstar_x", "pstar_y",
                       "u_unsat_x", "u_unsat_y", "u_x", "u_y", "psi",
                       "psi_hat", "radius_err"],
}

_TEXT_COLUMNS = {"pair", "kind", "mode"}
_INT_COLUMNS = {"k", "entity", "agent", "alive"}


def read_log(run_dir: Path | str, name: str) -> list[dict]:
    """Load one log as a list of row dicts, checking the schema."""
    path = Path(run_dir) / name
    required = SCHEMAS[name]
    with path.open() as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyDataError(f"{name} is empty") from None
        for col in required:
            if col not in header:
                raise PlotSchemaError(col, f"{name} is missing column {col!r}")
        idx = {col: header.index(col) for col in required}
        rows = []
        for raw in reader:
            row = {}
            for col in required:
                cell = raw[idx[col]]
                if col in _TEXT_COLUMNS:
                    row[col] = cell
                elif col in _INT_COLUMNS:
                    row[col] = int(cell)
                else:
                    row[col] = float(cell) if cell else float("nan")
            rows.append(row)
    if not rows:
        raise EmptyDataError(f"{name} holds no data rows")
    return rows
