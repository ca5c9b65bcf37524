"""Batch experiments, CSV emission, box-plot summaries and frame logs.

Episodes are replayable bit for bit from (scenario file, seed, mode); the
batch runner therefore writes byte-identical CSV for identical inputs.
Plot emission produces quartile tables (and PNG box plots when matplotlib
is installed) plus ellipse-chain geometry exports for guide visualization.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .field import field_geometry, mixture_pose_moments
from .operators import MODES, EpisodeMetrics, PlanFollower, run_episode
from .promp import DomainError, GuideMixture
from .scenarios import Scenario
from .session import GuidanceFrame, SessionConfig

CSV_COLUMNS = ("seed", "mode", "collisions", "completion_time")


def batch_compare(
    scenario: Scenario,
    mixture: GuideMixture,
    modes: tuple[str, ...],
    seeds: range | list[int],
    script_for_seed=None,
    *,
    session_config: SessionConfig | None = None,
    timeout: float = 60.0,
) -> list[dict]:
    """Run every (seed, mode) episode and return one row per episode.

    ``script_for_seed`` maps a seed to an operator script; the default is a
    plan follower with 0.3 sloppiness alternating between the first two
    guides.
    """
    if not seeds:
        raise DomainError("need at least one seed")
    for mode in modes:
        if mode not in MODES:
            raise DomainError(f"unknown mode {mode!r}")
    if script_for_seed is None:
        n_plans = max(mixture.n_components, 1)

        def script_for_seed(seed: int) -> PlanFollower:
            return PlanFollower(plan=seed % min(2, n_plans), noise=0.3, speed=0.05)

    rows = []
    for seed in seeds:
        for mode in modes:
            metrics, _ = run_episode(
                scenario,
                mixture,
                script_for_seed(seed),
                mode,
                seed,
                session_config=session_config,
                timeout=timeout,
            )
            rows.append(_row(metrics))
    return rows


def _row(m: EpisodeMetrics) -> dict:
    return {
        "seed": m.seed,
        "mode": m.mode,
        "collisions": m.collisions,
        "completion_time": m.completion_time,
    }


def write_rows_csv(rows: list[dict], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for r in rows:
            t = r["completion_time"]
            writer.writerow([r["seed"], r["mode"], r["collisions"], "inf" if math.isinf(t) else t])


def read_rows_csv(path: str | Path) -> list[dict]:
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            rows.append(
                {
                    "seed": int(rec["seed"]),
                    "mode": rec["mode"],
                    "collisions": int(rec["collisions"]),
                    "completion_time": float(rec["completion_time"]),
                }
            )
    return rows


def quartile_summary(rows: list[dict], metric: str = "collisions") -> list[dict]:
    """Min/quartiles/max per mode, the box-plot numbers."""
    if not rows:
        raise DomainError("empty table")
    out = []
    for mode in sorted({r["mode"] for r in rows}):
        values = np.array([float(r[metric]) for r in rows if r["mode"] == mode])
        with np.errstate(invalid="ignore"):  # timeouts are inf; inf quartiles intended
            out.append(
                {
                    "mode": mode,
                    "metric": metric,
                    "min": float(np.min(values)),
                    "q1": float(np.quantile(values, 0.25)),
                    "median": float(np.median(values)),
                    "q3": float(np.quantile(values, 0.75)),
                    "max": float(np.max(values)),
                    "n": int(values.size),
                }
            )
    return out


def write_summary_csv(summaries: list[dict], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(
            fh, fieldnames=["mode", "metric", "min", "q1", "median", "q3", "max", "n"]
        )
        writer.writeheader()
        for s in summaries:
            writer.writerow(s)


def emit_plots(
    rows: list[dict],
    out_dir: str | Path,
    frame_logs: list[Path] | None = None,
    render_png: bool = True,
) -> list[Path]:
    """Quartile CSVs per metric, optional PNG box plots, guide geometry exports."""
    if not rows:
        raise DomainError("empty table")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for metric in ("collisions", "completion_time"):
        summary = quartile_summary(rows, metric)
        path = out_dir / f"summary_{metric}.csv"
        write_summary_csv(summary, path)
        written.append(path)
        if render_png:
            png = _try_boxplot(rows, metric, out_dir / f"box_{metric}.png")
            if png is not None:
                written.append(png)
    for log in frame_logs or []:
        geo = export_guides_from_log(log, out_dir / (Path(log).stem + "_guides.json"))
        written.append(geo)
    return written


def _try_boxplot(rows: list[dict], metric: str, path: Path) -> Path | None:
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        return None
    modes = sorted({r["mode"] for r in rows})
    data = [
        [float(r[metric]) for r in rows if r["mode"] == m and math.isfinite(r[metric])]
        for m in modes
    ]
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.boxplot(data, tick_labels=modes)
    ax.set_ylabel(metric.replace("_", " "))
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


# ---------------------------------------------------------------------------
# Frame logs: newline-delimited frame documents, one per tick.


def write_frame_log(frames: list[GuidanceFrame], path: str | Path) -> None:
    with open(path, "w") as fh:
        for frame in frames:
            fh.write(json.dumps(frame.to_dict()) + "\n")


def read_frame_log(path: str | Path) -> list[dict]:
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


def export_guides_from_log(log_path: str | Path, out_path: str | Path) -> Path:
    """Extract the last guide geometry snapshot from a frame log."""
    guides = None
    for frame in read_frame_log(log_path):
        if frame.get("guides") is not None:
            guides = frame["guides"]
    if guides is None:
        raise DomainError(f"{log_path} carries no guide geometry")
    out_path = Path(out_path)
    out_path.write_text(json.dumps(guides) + "\n")
    return out_path


def export_mixture_guides(
    scenario: Scenario, mixture: GuideMixture, out_path: str | Path
) -> Path:
    """Ellipse chains of a mixture under its own weights (Fig-3-style export)."""
    moments = mixture_pose_moments(mixture, scenario.grid())
    chains = field_geometry(moments, mixture.weights())
    out_path = Path(out_path)
    out_path.write_text(json.dumps(chains) + "\n")
    return out_path
