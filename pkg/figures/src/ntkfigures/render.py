"""Render figures from ntklens result files.

Three kinds, one per experiment surface:

* ``scatter``  -- records.csv; two record columns against each other,
  optionally colored by a third (darker = smaller value).
* ``heatmap``  -- correlation.json; the Pearson matrix with each cell
  annotated to two decimals.
* ``errorbar`` -- comparison.csv; one line per selection method across
  dataset sizes with +-standard-error bars.

Rendering never recomputes statistics and never modifies its inputs; with a
fixed style the same input bytes produce the same output bytes.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

matplotlib.rcParams["svg.hashsalt"] = "ntkfigures"

KINDS = ("scatter", "heatmap", "errorbar")

# darker end of the map = smaller value, matching the experiment plots
COLORMAP = "viridis"


@dataclass(frozen=True)
class FigureRequest:
    kind: str
    input_path: str
    output_path: str
    x: str | None = None
    y: str | None = None
    color: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")


def _read_csv_columns(path) -> dict[str, list[str]]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ValueError(f"{path}: empty input")
        columns = {name: [] for name in reader.fieldnames}
        for row in reader:
            for name in reader.fieldnames:
                columns[name].append(row[name])
    if not next(iter(columns.values()), []):
        raise ValueError(f"{path}: no data rows")
    return columns


def _float_column(columns, name, path):
    if name not in columns:
        raise ValueError(f"{path}: no column {name!r}; available: {sorted(columns)}")
    return [float(v) for v in columns[name]]


def _build_scatter(request: FigureRequest):
    columns = _read_csv_columns(request.input_path)
    x_name = request.x or "starting_entropy"
    y_name = request.y or "starting_trace"
    xs = _float_column(columns, x_name, request.input_path)
    ys = _float_column(columns, y_name, request.input_path)

    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    if request.color:
        cs = _float_column(columns, request.color, request.input_path)
        points = ax.scatter(xs, ys, c=cs, cmap=COLORMAP, s=22)
        fig.colorbar(points, ax=ax, label=request.color)
    else:
        ax.scatter(xs, ys, s=22)
    ax.set_xlabel(x_name)
    ax.set_ylabel(y_name)
    fig.tight_layout()
    return fig


def _build_heatmap(request: FigureRequest):
    payload = json.loads(Path(request.input_path).read_text())
    if "matrix" not in payload or "variables" not in payload:
        raise ValueError(f"{request.input_path}: not a correlation file (missing matrix/variables)")
    names = payload["variables"]
    matrix = payload["matrix"]
    if not names:
        raise ValueError(f"{request.input_path}: empty variable list")

    k = len(names)
    fig, ax = plt.subplots(figsize=(1.1 * k + 2.2, 1.1 * k + 1.2))
    image = ax.imshow(matrix, cmap="RdBu_r", vmin=-1.0, vmax=1.0)
    ax.set_xticks(range(k), names, rotation=45, ha="right")
    ax.set_yticks(range(k), names)
    for i in range(k):
        for j in range(k):
            ax.text(j, i, f"{matrix[i][j]:.2f}", ha="center", va="center", fontsize=9)
    fig.colorbar(image, ax=ax, shrink=0.8)
    fig.tight_layout()
    return fig


def _build_errorbar(request: FigureRequest):
    columns = _read_csv_columns(request.input_path)
    metric = request.y or "min_test_loss"
    sizes = _float_column(columns, "dataset_size", request.input_path)
    means = _float_column(columns, f"{metric}_mean", request.input_path)
    errors = _float_column(columns, f"{metric}_se", request.input_path)
    methods = columns.get("method")
    if methods is None:
        raise ValueError(f"{request.input_path}: no column 'method'")

    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    for method in sorted(set(methods)):
        rows = [i for i, m in enumerate(methods) if m == method]
        rows.sort(key=lambda i: sizes[i])
        ax.errorbar(
            [sizes[i] for i in rows],
            [means[i] for i in rows],
            yerr=[errors[i] for i in rows],
            marker="o",
            capsize=3,
            label=method,
        )
    ax.set_xlabel("dataset size")
    ax.set_ylabel(metric)
    ax.legend()
    fig.tight_layout()
    return fig


_BUILDERS = {
    "scatter": _build_scatter,
    "heatmap": _build_heatmap,
    "errorbar": _build_errorbar,
}


def build_figure(request: FigureRequest):
    """Open matplotlib figure for a request; caller owns closing it."""
    return _BUILDERS[request.kind](request)


def render(request: FigureRequest):
    """Build the figure and write it to request.output_path."""
    fig = build_figure(request)
    out = Path(request.output_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    metadata = {"Date": None} if out.suffix == ".svg" else None
    fig.savefig(out, dpi=150, metadata=metadata)
    plt.close(fig)
    return out
