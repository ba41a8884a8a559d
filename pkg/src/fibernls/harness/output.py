"""Deterministic CSV/JSON writers for experiment results."""

from __future__ import annotations

import csv
import enum
import json
import math
from pathlib import Path

import numpy as np

from ..field import write_field_csv

TRAJECTORY_COLUMNS = ("z", "l2", "t2_moment", "t_ut_moment")


def clean(obj):
    """Make ``obj`` JSON-safe: numpy scalars to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [clean(v) for v in obj.tolist()]
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, Path):
        return str(obj)
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def write_json(path, report: dict) -> None:
    Path(path).write_text(json.dumps(clean(report), indent=2) + "\n")


def write_rows(path, columns, rows) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(row[c]) for c in columns])


def _cell(x):
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return x


def write_trajectory_csv(path, traj) -> None:
    write_rows(path, TRAJECTORY_COLUMNS, traj.observables())


def write_snapshots(directory, traj, prefix: str = "") -> list:
    """One ``t,re,im`` CSV per snapshot, named by snapshot index."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    names = []
    for i, snap in enumerate(traj.snapshots):
        name = f"{prefix}{i:05d}.csv"
        write_field_csv(snap, directory / name)
        names.append(name)
    return names


def prepare_dirs(out_dir) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir


def write_result(result, out_dir, formats=("csv", "json", "svg"), fields: bool = False) -> Path:
    """Write an experiment result: metrics.csv, report.json, plots/*.svg, fields/*.csv."""
    from .svg import line_chart

    out = prepare_dirs(out_dir)
    if "csv" in formats:
        for name, table in result.tables.items():
            if table is not None:
                write_rows(out / name, *table)
    if "json" in formats:
        write_json(out / "report.json", {**result.report, "exit_code": result.exit_code})
    if "svg" in formats and result.plots:
        (out / "plots").mkdir(exist_ok=True)
        for name, kwargs in result.plots.items():
            line_chart(out / "plots" / name, **kwargs)
    if fields:
        for label, traj in result.trajectories.items():
            write_snapshots(out / "fields", traj, prefix=f"{label}_")
    return out
