"""Render scenario CSVs to publication-style figures.

Reads only the runner's CSV schema and never recomputes metrics: the y data
on every curve comes verbatim from the ``value_db`` column.  Output is
deterministic for fixed input (fixed SVG hash salt, no date metadata).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

REQUIRED_COLUMNS = ("scenario", "user", "subcarrier", "Nr", "L", "metric", "value_db")

_METRIC_LABELS = {
    "sir_fse": "FSE",
    "sir_ppn": "PPN single-tap",
    "sinr_sim": "simulated",
    "sinr_theory": "theoretical",
}


class PlotError(ValueError):
    """Raised for malformed or empty input CSVs."""


@dataclass(frozen=True)
class FigureSpec:
    scenario: str
    csv_path: Path
    out_path: Path
    group_keys: tuple = ("L", "Nr", "metric")
    x_label: str = "normalized frequency"
    y_label: str = "SIR / SINR (dB)"
    raster: bool = False


def read_rows(csv_path) -> list[dict]:
    with open(csv_path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in REQUIRED_COLUMNS if c not in header]
        if missing:
            raise PlotError(f"CSV {csv_path} is missing columns: {', '.join(missing)}")
        rows = list(reader)
    if not rows:
        raise PlotError(f"CSV {csv_path} has no data rows")
    return rows


def group_curves(rows, group_keys):
    """Group rows into curves keyed by the given columns.

    Within a group, points are averaged over users per subcarrier and the x
    axis is subcarrier / L.
    """
    groups: dict[tuple, dict[int, list[float]]] = {}
    n_sub: dict[tuple, int] = {}
    for row in rows:
        key = tuple(row[k] for k in group_keys)
        sc = int(row["subcarrier"])
        groups.setdefault(key, {}).setdefault(sc, []).append(float(row["value_db"]))
        n_sub[key] = int(row["L"])
    curves = {}
    for key, points in groups.items():
        L = n_sub[key]
        xs = sorted(points)
        ys = [sum(points[sc]) / len(points[sc]) for sc in xs]
        curves[key] = ([sc / L for sc in xs], ys)
    return curves


def build_figure(spec: FigureSpec):
    """Build the matplotlib figure; returns (figure, curves)."""
    rows = read_rows(spec.csv_path)
    for k in spec.group_keys:
        if rows and k not in rows[0]:
            raise PlotError(f"grouping key {k!r} not in CSV header")
    # drop grouping keys that are constant across the file, to keep legends short
    varying = tuple(k for k in spec.group_keys
                    if len({r[k] for r in rows}) > 1) or ("Nr",)
    curves = group_curves(rows, varying)
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for key in sorted(curves, key=_numeric_sort_key):
        xs, ys = curves[key]
        label = ", ".join(
            _METRIC_LABELS.get(v, f"{k}={v}") for k, v in zip(varying, key))
        ax.plot(xs, ys, marker="o", markersize=3.5, label=label)
    ax.set_xlabel(spec.x_label)
    ax.set_ylabel(spec.y_label)
    ax.set_title(spec.scenario)
    ax.grid(True, alpha=0.4)
    ax.legend(fontsize=8)
    fig.tight_layout()
    return fig, curves


def _numeric_sort_key(key):
    return tuple((0, float(v)) if _is_number(v) else (1, v) for v in key)


def _is_number(v) -> bool:
    try:
        float(v)
        return True
    except ValueError:
        return False


def plot_scenario(csv_path, spec: FigureSpec | None = None, *, scenario: str = "",
                  out_path=None, raster: bool = False) -> Path:
    """Render one scenario CSV to an image file; returns the output path."""
    if spec is None:
        if out_path is None:
            raise PlotError("need an output path")
        spec = FigureSpec(scenario=scenario or Path(csv_path).stem,
                          csv_path=Path(csv_path), out_path=Path(out_path),
                          raster=raster)
    fig, _ = build_figure(spec)
    out = Path(spec.out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    fmt = "png" if spec.raster else None       # default: vector via suffix (.svg/.pdf)
    with plt.rc_context({"svg.hashsalt": "fscmt"}):
        fig.savefig(out, format=fmt, metadata=_deterministic_metadata(out, spec.raster))
    plt.close(fig)
    return out


def _deterministic_metadata(out: Path, raster: bool):
    suffix = ".png" if raster else out.suffix.lower()
    if suffix == ".svg":
        return {"Date": None}
    if suffix == ".pdf":
        return {"CreationDate": None}
    return None
