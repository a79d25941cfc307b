"""The four figure kinds rendered from circumnav run logs."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .io import read_log

# fixed style: identical inputs must render identical bytes
matplotlib.rcParams["svg.hashsalt"] = "circumnav-plots"
matplotlib.rcParams["figure.dpi"] = 100

KIND_COLORS = {"modified": "tab:blue", "classical": "tab:orange", "rls": "tab:green"}
AGENT_COLORS = ["tab:blue", "tab:orange", "tab:green", "tab:red", "tab:purple"]


@dataclass
class PlotSpec:
    run_dir: Path
    kind: str  # rel-loc | occlusion | trajectory | phase-gap
    out_path: Path
    shade_windows: bool = True
    markers: bool = True
    image_format: str = "svg"


def _save(fig, spec: PlotSpec) -> Path:
    spec.out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(
        spec.out_path,
        format=spec.image_format,
        metadata={"Date": None} if spec.image_format == "svg" else None,
    )
    plt.close(fig)
    return spec.out_path


def plot_rel_loc(spec: PlotSpec) -> Path:
    """Estimated vs true relative positions and the error traces."""
    rows = read_log(spec.run_dir, "relative.csv")
    pairs = sorted({r["pair"] for r in rows})
    pair = pairs[0]
    sel = [r for r in rows if r["pair"] == pair]
    kinds = sorted({r["kind"] for r in sel})
    fig, (ax_xy, ax_err) = plt.subplots(1, 2, figsize=(11, 4.5))
    ax_xy.plot(
        [r["true_px"] for r in sel if r["kind"] == kinds[0]],
        [r["true_py"] for r in sel if r["kind"] == kinds[0]],
        "k-", linewidth=1.5, label="truth",
    )
    for kind in kinds:
        ks = [r for r in sel if r["kind"] == kind]
        ax_xy.plot(
            [r["phat_x"] for r in ks],
            [r["phat_y"] for r in ks],
            color=KIND_COLORS.get(kind, "gray"),
            linewidth=0.9,
            label=kind,
        )
        ax_err.plot(
            [r["t"] for r in ks],
            [r["err"] for r in ks],
            color=KIND_COLORS.get(kind, "gray"),
            linewidth=0.9,
            label=kind,
        )
    ax_xy.set_xlabel("x [m]")
    ax_xy.set_ylabel("y [m]")
    ax_xy.set_title(f"relative position estimates, pair {pair}")
    ax_xy.axis("equal")
    ax_xy.legend(loc="best", fontsize=8)
    ax_err.set_xlabel("t [s]")
    ax_err.set_ylabel("error [m]")
    ax_err.set_title("estimation error")
    ax_err.legend(loc="best", fontsize=8)
    fig.tight_layout()
    return _save(fig, spec)


def _shade_non_direct(ax, rows, dt):
    start = None
    for r in rows + [None]:
        occluded = r is not None and r["mode"] != "direct"
        if occluded and start is None:
            start = r["t"]
        elif not occluded and start is not None:
            end = r["t"] if r is not None else rows[-1]["t"] + dt
            ax.axvspan(start, end, color="0.85", zorder=0)
            start = None
    if start is not None:
        ax.axvspan(start, rows[-1]["t"] + dt, color="0.85", zorder=0)


def plot_occlusion(spec: PlotSpec) -> Path:
    """Per-agent measurement/estimation error with occluded windows shaded."""
    rows = read_log(spec.run_dir, "target.csv")
    agents = sorted({r["agent"] for r in rows})
    dt = rows[1]["t"] - rows[0]["t"] if len(rows) > 1 else 0.1
    fig, axes = plt.subplots(len(agents), 1, figsize=(9, 2.6 * len(agents)), sharex=True)
    if len(agents) == 1:
        axes = [axes]
    for ax, agent in zip(axes, agents):
        sel = [r for r in rows if r["agent"] == agent]
        if spec.shade_windows:
            _shade_non_direct(ax, sel, dt)
        ax.plot([r["t"] for r in sel], [r["meas_err"] for r in sel],
                color="tab:gray", linewidth=0.8, label="measurement error")
        ax.plot([r["t"] for r in sel], [r["est_err"] for r in sel],
                color="tab:blue", linewidth=1.1, label="estimation error")
        ax.set_ylabel(f"agent {agent} [m]")
        ax.legend(loc="upper right", fontsize=8)
    axes[-1].set_xlabel("t [s]")
    axes[0].set_title("target errors (shaded: no direct view)")
    fig.tight_layout()
    return _save(fig, spec)


def plot_trajectory(spec: PlotSpec) -> Path:
    """Planar trajectories with snapshot markers (start, failures, end)."""
    rows = read_log(spec.run_dir, "world.csv")
    entities = sorted({r["entity"] for r in rows})
    fig, ax = plt.subplots(figsize=(7, 7))
    snapshots = {min(r["k"] for r in rows), max(r["k"] for r in rows)}
    for ent in entities:
        sel = [r for r in rows if r["entity"] == ent]
        alive = [r for r in sel if r["alive"]]
        if ent == 0:
            ax.plot([r["px"] for r in sel], [r["py"] for r in sel],
                    "k--", linewidth=1.5, label="target")
        else:
            color = AGENT_COLORS[(ent - 1) % len(AGENT_COLORS)]
            ax.plot([r["px"] for r in alive], [r["py"] for r in alive],
                    color=color, linewidth=0.9, label=f"agent {ent}")
            deaths = [r["k"] for prev, r in zip(sel, sel[1:])
                      if prev["alive"] and not r["alive"]]
            snapshots.update(deaths)
            if deaths and spec.markers:
                dead_at = next(r for r in sel if r["k"] == deaths[0])
                ax.plot(dead_at["px"], dead_at["py"], "x", color=color, markersize=10)
    if spec.markers:
        for k_snap in sorted(snapshots):
            for ent in entities:
                r = next((x for x in rows if x["entity"] == ent and x["k"] == k_snap), None)
                if r is not None and (ent == 0 or r["alive"] or r["k"] == k_snap):
                    marker = "s" if ent == 0 else "^"
                    color = "k" if ent == 0 else AGENT_COLORS[(ent - 1) % len(AGENT_COLORS)]
                    ax.plot(r["px"], r["py"], marker, color=color, markersize=5, alpha=0.7)
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.set_title("trajectories")
    ax.axis("equal")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    return _save(fig, spec)


def plot_phase_gap(spec: PlotSpec) -> Path:
    """Sorted pairwise phase gaps over time, with the even-spacing levels."""
    rows = read_log(spec.run_dir, "controller.csv")
    by_step: dict[float, list[float]] = {}
    for r in rows:
        if not math.isnan(r["theta"]):
            by_step.setdefault(r["t"], []).append(r["theta"])
    ts, gap_series = [], []
    for t in sorted(by_step):
        thetas = sorted(th % (2 * math.pi) for th in by_step[t])
        if len(thetas) < 2:
            continue
        gaps = [b - a for a, b in zip(thetas, thetas[1:])]
        gaps.append(thetas[0] + 2 * math.pi - thetas[-1])
        ts.append(t)
        gap_series.append(sorted(gaps))
    if not gap_series:
        from .io import EmptyDataError

        raise EmptyDataError("no phase data in controller.csv")
    n_max = max(len(g) for g in gap_series)
    fig, ax = plt.subplots(figsize=(9, 4))
    for i in range(n_max):
        ax.plot(
            [t for t, g in zip(ts, gap_series) if len(g) > i],
            [g[i] for g in gap_series if len(g) > i],
            linewidth=0.9,
        )
    for n in {len(g) for g in gap_series}:
        ax.axhline(2 * math.pi / n, color="0.7", linestyle=":", zorder=0)
    ax.set_xlabel("t [s]")
    ax.set_ylabel("phase gap [rad]")
    ax.set_title("pairwise orbit-phase gaps")
    fig.tight_layout()
    return _save(fig, spec)


RENDERERS = {
    "rel-loc": plot_rel_loc,
    "occlusion": plot_occlusion,
    "trajectory": plot_trajectory,
    "phase-gap": plot_phase_gap,
}


def plot(spec: PlotSpec) -> Path:
    """Render one figure kind from a run directory."""
    if spec.kind not in RENDERERS:
        raise ValueError(f"unknown figure kind {spec.kind!r}")
    return RENDERERS[spec.kind](spec)
