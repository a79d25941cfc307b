"""Run metrics: RMSE tables, error series, phase gaps, mode counts."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .config import ScenarioConfig
from .errors import EmptyWindowError, SchemaError
from .geometry import TWO_PI

DEFAULT_WINDOW_START = 20.0


def rmse(errors: Sequence[float]) -> float:
    """Root mean square of an error series; rejects empty windows."""
    vals = [e for e in errors if not math.isnan(e)]
    if not vals:
        raise EmptyWindowError("no samples in the requested window")
    return math.sqrt(sum(e * e for e in vals) / len(vals))


@dataclass
class RunMetrics:
    """Everything the experiments report, computed from the run logs."""

    window_start: float
    relative_rmse: dict[str, dict[str, float]] = field(default_factory=dict)
    target_error_series: dict[int, dict[str, list[float]]] = field(default_factory=dict)
    radius_error_series: dict[int, dict[str, list[float]]] = field(default_factory=dict)
    phase_gap_series: list[tuple[float, tuple[float, ...]]] = field(default_factory=list)
    mode_counts: dict[int, dict[str, int]] = field(default_factory=dict)

    def pooled_relative_rmse(self) -> dict[str, float]:
        """RMSE per estimator kind pooled over all pairs (quadratic mean)."""
        pools: dict[str, list[float]] = {}
        for per_kind in self.relative_rmse.values():
            for kind, value in per_kind.items():
                pools.setdefault(kind, []).append(value)
        return {
            kind: math.sqrt(sum(v * v for v in vals) / len(vals))
            for kind, vals in pools.items()
        }

    def summary(self) -> dict:
        """JSON-ready scalar summary."""
        out: dict = {
            "window_start": self.window_start,
            "relative_rmse": self.relative_rmse,
            "relative_rmse_pooled": self.pooled_relative_rmse() if self.relative_rmse else {},
            "mode_counts": {str(k): v for k, v in self.mode_counts.items()},
        }
        out["target_mean_est_err"] = {}
        for agent, series in self.target_error_series.items():
            vals = [e for e in series["est_err"] if not math.isnan(e)]
            if vals:
                out["target_mean_est_err"][str(agent)] = sum(vals) / len(vals)
        out["radius_error_mean_abs"] = {}
        for agent, series in self.radius_error_series.items():
            sel = [
                abs(e)
                for t, e in zip(series["t"], series["radius_err"])
                if t >= self.window_start
            ]
            if sel:
                out["radius_error_mean_abs"][str(agent)] = sum(sel) / len(sel)
        if self.phase_gap_series:
            out["final_phase_gaps"] = list(self.phase_gap_series[-1][1])
        return out


def phase_gaps(thetas: Sequence[float]) -> tuple[float, ...]:
    """Sorted circular gaps between the given phases."""
    s = sorted(th % TWO_PI for th in thetas)
    if len(s) < 2:
        return ()
    gaps = [b - a for a, b in zip(s, s[1:])] + [s[0] + TWO_PI - s[-1]]
    return tuple(sorted(gaps))


def compute_metrics_from_tables(tables, cfg: Optional[ScenarioConfig] = None,
                                window_start: float = DEFAULT_WINDOW_START) -> dict:
    return build_metrics(tables, window_start=window_start).summary()


def build_metrics(tables, window_start: float = DEFAULT_WINDOW_START) -> RunMetrics:
    """Assemble RunMetrics from in-memory log tables."""
    m = RunMetrics(window_start=window_start)

    per_pair_kind: dict[tuple[str, str], list[float]] = {}
    for row in tables.relative:
        k, t, pair, kind = row[0], row[1], row[2], row[3]
        err = row[10]
        if t >= window_start:
            per_pair_kind.setdefault((pair, kind), []).append(err)
    for (pair, kind), errs in sorted(per_pair_kind.items()):
        try:
            value = rmse(errs)
        except EmptyWindowError:
            continue
        m.relative_rmse.setdefault(pair, {})[kind] = value

    for row in tables.target:
        k, t, agent, mode, meas_err, est_err = row[0], row[1], row[2], row[3], row[4], row[5]
        series = m.target_error_series.setdefault(
            int(agent), {"t": [], "meas_err": [], "est_err": [], "mode": []}
        )
        series["t"].append(t)
        series["meas_err"].append(meas_err)
        series["est_err"].append(est_err)
        series["mode"].append(mode)
        counts = m.mode_counts.setdefault(int(agent), {})
        counts[mode] = counts.get(mode, 0) + 1

    theta_by_step: dict[float, list[float]] = {}
    for row in tables.controller:
        k, t, agent, theta = row[0], row[1], row[2], row[3]
        radius_err = row[12]
        series = m.radius_error_series.setdefault(int(agent), {"t": [], "radius_err": []})
        series["t"].append(t)
        series["radius_err"].append(radius_err)
        if not (isinstance(theta, float) and math.isnan(theta)):
            theta_by_step.setdefault(t, []).append(float(theta))
    for t in sorted(theta_by_step):
        gaps = phase_gaps(theta_by_step[t])
        if gaps:
            m.phase_gap_series.append((t, gaps))
    return m


# ---------------------------------------------------------------------------
# loading logs back from a run directory

_REQUIRED = {
    "relative.csv": ["k", "t", "pair", "kind", "phat_x", "phat_y", "vhat_x",
                     "vhat_y", "true_px", "true_py", "err", "trace_p"],
    "target.csv": ["k", "t", "agent", "mode", "meas_err", "est_err", "trace_p"],
    "controller.csv": ["k", "t", "agent", "theta", "pstar_x", "pstar_y",
                       "u_unsat_x", "u_unsat_y", "u_x", "u_y", "psi", "psi_hat",
                       "radius_err"],
    "world.csv": ["k", "t", "entity", "px", "py", "vx", "vy", "psi", "alive"],
}

_STRING_COLUMNS = {"pair", "kind", "mode"}


def read_log(path: Path, required: list[str]) -> list[list]:
    """Read one CSV log, checking the schema and converting numerics."""
    with path.open() as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(required[0], f"{path.name} is empty") from None
        for col in required:
            if col not in header:
                raise SchemaError(col, f"{path.name} is missing column {col!r}")
        index = [header.index(c) for c in required]
        rows = []
        for raw in reader:
            row = []
            for col, idx in zip(required, index):
                cell = raw[idx]
                if col in _STRING_COLUMNS:
                    row.append(cell)
                elif col in ("k", "agent", "entity", "alive"):
                    row.append(int(cell))
                else:
                    row.append(float(cell) if cell else float("nan"))
            rows.append(row)
    return rows


def load_tables(run_dir: Path | str):
    """Rebuild LogTables from a run directory's CSV files."""
    from .runner import LogTables

    run_dir = Path(run_dir)
    tables = LogTables()
    tables.world = read_log(run_dir / "world.csv", _REQUIRED["world.csv"])
    tables.relative = read_log(run_dir / "relative.csv", _REQUIRED["relative.csv"])
    tables.target = read_log(run_dir / "target.csv", _REQUIRED["target.csv"])
    tables.controller = read_log(run_dir / "controller.csv", _REQUIRED["controller.csv"])
    return tables


def compute_metrics(run_dir: Path | str,
                    window_start: float = DEFAULT_WINDOW_START) -> RunMetrics:
    """Recompute metrics from a run directory."""
    return build_metrics(load_tables(run_dir), window_start=window_start)


# ---------------------------------------------------------------------------
# estimator benchmark

def compare_estimators(
    cfg: ScenarioConfig,
    trials: int = 10,
    window_start: float = DEFAULT_WINDOW_START,
) -> dict:
    """Mean post-window RMSE per estimator kind over seeded trials."""
    from .runner import run_scenario

    if trials < 1:
        raise ValueError("need at least one trial")
    kinds = ("modified", "classical", "rls")
    per_trial: dict[str, list[float]] = {kind: [] for kind in kinds}
    for trial in range(trials):
        trial_cfg = replace(cfg, seed=cfg.seed + trial)
        result = run_scenario(trial_cfg, estimator_kinds=kinds)
        pooled = build_metrics(result.tables, window_start=window_start).pooled_relative_rmse()
        for kind in kinds:
            per_trial[kind].append(pooled[kind])
    return {
        "trials": trials,
        "window_start": window_start,
        "mean_rmse": {kind: float(np.mean(per_trial[kind])) for kind in kinds},
        "per_trial": per_trial,
    }
