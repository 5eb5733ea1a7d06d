#!/usr/bin/env python3
"""Render figures from experiment CSV outputs.

Five figure kinds mirror the experiment drivers: per-element ``distance``
profiles, beamforming ``gain`` versus range, ``nmse`` versus SNR (log y, one
labeled line per estimator), ``timing`` versus array size, and design
``coherence`` across seeds. The script holds no numerics beyond grouping and
medians; everything it draws comes from the CSVs.

Usage::

    plots.py --spec figures.json
    plots.py --kind nmse --csv out/nmse.csv --out figs/nmse

Each rendered figure is written as both PNG and SVG next to the requested
output stem.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "xldma-plots"  # deterministic SVG ids
import matplotlib.pyplot as plt  # noqa: E402

FIGURE_KINDS = ("distance", "gain", "nmse", "timing", "coherence")

# per-kind defaults: (x column, y column, series column, log x, log y)
_KIND_DEFAULTS = {
    "distance": ("elem", "distance", "model", False, False),
    "gain": ("range_m", "gain", "model", True, False),
    "nmse": ("snr_db", "nmse", "estimator", False, True),
    "timing": ("elems", "wall_time_s", "estimator", False, True),
    "coherence": ("seed_index", "coherence", "mode", False, True),
}


class MissingColumnError(KeyError):
    """A referenced CSV column does not exist."""

    def __init__(self, column: str, path: str, available):
        self.column = column
        super().__init__(
            f"column {column!r} not found in {path}; available: {sorted(available)}")


class EmptySeriesError(ValueError):
    """The CSV produced no series to draw."""


@dataclass
class FigureSpec:
    """What to draw: input CSVs, figure kind, output stem, and grouping."""

    csv_paths: list
    kind: str
    out: str
    series_key: str | None = None
    x_key: str | None = None
    y_key: str | None = None
    log_x: bool | None = None
    log_y: bool | None = None
    title: str | None = None

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; "
                             f"expected one of {FIGURE_KINDS}")
        if isinstance(self.csv_paths, (str, Path)):
            self.csv_paths = [self.csv_paths]
        defaults = _KIND_DEFAULTS[self.kind]
        self.x_key = self.x_key or defaults[0]
        self.y_key = self.y_key or defaults[1]
        self.series_key = self.series_key or defaults[2]
        self.log_x = defaults[3] if self.log_x is None else self.log_x
        self.log_y = defaults[4] if self.log_y is None else self.log_y


def read_rows(paths) -> list:
    rows = []
    for path in paths:
        with open(path, newline="", encoding="utf-8") as f:
            rows.extend(csv.DictReader(f))
    return rows


def _column(rows, key, path_label):
    if not rows or key not in rows[0]:
        available = rows[0].keys() if rows else []
        raise MissingColumnError(key, path_label, available)


def collect_series(spec: FigureSpec) -> dict:
    """Group rows into {series label: (x values, y medians)} pairs.

    The distance kind keeps raw per-element values (one strip is selected if
    several are present); the statistical kinds reduce repeated (series, x)
    cells to their median.
    """
    rows = read_rows(spec.csv_paths)
    label = ", ".join(str(p) for p in spec.csv_paths)
    if spec.kind == "distance":
        _column(rows, "strip", label)
        _column(rows, "elem", label)
        strip = min(r["strip"] for r in rows)
        rows = [r for r in rows if r["strip"] == strip]
        models = [k for k in ("spherical", "taylor2", "oblong", "planar")
                  if rows and k in rows[0]]
        if not models:
            raise MissingColumnError("spherical", label,
                                     rows[0].keys() if rows else [])
        series = {}
        for model in models:
            pts = sorted((int(r["elem"]), float(r[model])) for r in rows)
            series[model] = ([p[0] for p in pts], [p[1] for p in pts])
        return series

    _column(rows, spec.x_key, label)
    _column(rows, spec.y_key, label)
    _column(rows, spec.series_key, label)
    cells = {}
    for r in rows:
        key = (r[spec.series_key], float(r[spec.x_key]))
        cells.setdefault(key, []).append(float(r[spec.y_key]))
    series = {}
    for (name, x), values in sorted(cells.items()):
        values = sorted(values)
        mid = values[len(values) // 2] if len(values) % 2 else \
            0.5 * (values[len(values) // 2 - 1] + values[len(values) // 2])
        xs, ys = series.setdefault(name, ([], []))
        xs.append(x)
        ys.append(mid)
    return series


def render(spec: FigureSpec) -> list:
    """Draw one figure and write it as PNG and SVG; returns the paths."""
    series = collect_series(spec)
    if not series:
        raise EmptySeriesError(
            f"no series found in {spec.csv_paths} for kind {spec.kind!r}")
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for name, (xs, ys) in series.items():
        ax.plot(xs, ys, marker="o", markersize=3.5, linewidth=1.4, label=name)
    if spec.log_x:
        ax.set_xscale("log")
    if spec.log_y:
        ax.set_yscale("log")
    ax.set_xlabel(spec.x_key)
    ax.set_ylabel(spec.y_key)
    ax.grid(True, alpha=0.3, linestyle=":")
    ax.legend(fontsize=9)
    if spec.title:
        ax.set_title(spec.title)
    out = Path(spec.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    written = []
    for ext in ("png", "svg"):
        path = out.with_suffix(f".{ext}")
        fig.savefig(path, dpi=150, bbox_inches="tight",
                    metadata={"Date": None} if ext == "svg" else None)
        written.append(path)
    plt.close(fig)
    return written


def load_specs(path) -> list:
    """Read one FigureSpec or a list of them from a JSON file."""
    data = json.loads(Path(path).read_text())
    if isinstance(data, dict):
        data = [data]
    return [FigureSpec(**entry) for entry in data]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="Render experiment figures from CSV results")
    parser.add_argument("--spec", help="JSON file with one figure spec or a list")
    parser.add_argument("--kind", choices=FIGURE_KINDS)
    parser.add_argument("--csv", action="append", default=[],
                        help="input CSV (repeatable)")
    parser.add_argument("--out", help="output stem; .png and .svg are added")
    parser.add_argument("--series-key", default=None)
    parser.add_argument("--title", default=None)
    args = parser.parse_args(argv)
    try:
        if args.spec:
            specs = load_specs(args.spec)
        else:
            if not (args.kind and args.csv and args.out):
                parser.error("without --spec, provide --kind, --csv and --out")
            specs = [FigureSpec(args.csv, args.kind, args.out,
                                series_key=args.series_key, title=args.title)]
        for spec in specs:
            for path in render(spec):
                print(f"wrote {path}")
        return 0
    except (MissingColumnError, EmptySeriesError, FileNotFoundError,
            ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
