"""Plot-ready exports of trial traces: aligned channel CSV and SVG plots.

The exported channel set mirrors the per-trial story: closing command,
grip aperture, thumb pressure, contact location, tactor current, and the
object's horizontal distance from the end bin and height above the table.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .trials import read_trial_csv

EXPORT_COLUMNS = ("tick", "u_c", "aperture", "p", "contact_x", "tactor_current", "D", "H")
CHANNEL_GROUPS = EXPORT_COLUMNS[1:]


class TraceIntegrityError(ValueError):
    """Trial log failed to parse as a trace table."""


def load_trace(trial_csv: str | Path) -> dict[str, np.ndarray]:
    try:
        return read_trial_csv(trial_csv)
    except (ValueError, KeyError, IndexError) as exc:
        raise TraceIntegrityError(f"{trial_csv}: {exc}") from exc


def channel_arrays(trace: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
    """The seven channel groups, with contact location masked to NaN when
    nothing touches the finger."""
    x = trace["x"].astype(float).copy()
    x[trace["side"] == 0] = math.nan
    return {
        "u_c": trace["u_c"],
        "aperture": trace["aperture"],
        "p": trace["p"],
        "contact_x": x,
        "tactor_current": trace["tactor_current"],
        "D": trace["D"],
        "H": trace["H"],
    }


def export_csv(trial_csv: str | Path, out_path: str | Path) -> None:
    trace = load_trace(trial_csv)
    channels = channel_arrays(trace)
    n = len(trace["tick"])
    with open(out_path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(EXPORT_COLUMNS)
        for i in range(n):
            row = [int(trace["tick"][i])]
            for name in CHANNEL_GROUPS:
                v = float(channels[name][i])
                row.append("nan" if math.isnan(v) else repr(v))
            writer.writerow(row)


def read_export_csv(path: str | Path) -> dict[str, np.ndarray]:
    cols: dict[str, list] = {name: [] for name in EXPORT_COLUMNS}
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        if tuple(header) != EXPORT_COLUMNS:
            raise TraceIntegrityError(f"{path}: unexpected columns {header}")
        for row in reader:
            for name, value in zip(EXPORT_COLUMNS, row):
                cols[name].append(value)
    out = {"tick": np.array([int(v) for v in cols["tick"]])}
    for name in CHANNEL_GROUPS:
        out[name] = np.array([float(v) for v in cols[name]])
    return out


_PLOT_LABELS = {
    "u_c": "closing command",
    "aperture": "aperture (m)",
    "p": "pressure",
    "contact_x": "contact location",
    "tactor_current": "tactor current (A)",
    "D": "distance to end bin (m)",
    "H": "object height (m)",
}


def export_svg(trial_csv: str | Path, out_path: str | Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    trace = load_trace(trial_csv)
    channels = channel_arrays(trace)
    t = trace["tick"] / 1000.0
    fig, axes = plt.subplots(len(CHANNEL_GROUPS), 1, sharex=True, figsize=(8, 11))
    for ax, name in zip(axes, CHANNEL_GROUPS):
        ax.plot(t, channels[name], linewidth=0.7)
        ax.set_ylabel(_PLOT_LABELS[name], fontsize=8)
        ax.grid(True, alpha=0.3)
    axes[-1].set_xlabel("time (s)")
    fig.tight_layout()
    fig.savefig(out_path, format="svg")
    plt.close(fig)


def export_traces(trial_csv: str | Path, fmt: str, out_path: str | Path) -> None:
    if fmt == "csv":
        export_csv(trial_csv, out_path)
    elif fmt == "svg":
        export_svg(trial_csv, out_path)
    else:
        raise ValueError(f"unknown export format {fmt!r}")
