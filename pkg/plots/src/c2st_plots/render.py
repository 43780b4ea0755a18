"""
Render power and type-I-error charts from a benchmark sweep CSV.

The CSV is the only interface to the benchmark: one row per grid cell with
the columns listed in :data:`REQUIRED_COLUMNS`. Three facets are supported:
``power_vs_N`` (H1 rejection rate against total sample size, one line per
method), ``type1_vs_N`` (same for H0, with a horizontal reference line at the
significance level), and ``method_bars`` (grouped bars of power per method).
Error bars come from the ``stderr`` column. Rendering never mutates the CSV,
and the plotted series values are exactly the parsed ``rate`` values.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

FACETS = ("power_vs_N", "type1_vs_N", "method_bars")

REQUIRED_COLUMNS = (
    "method", "dataset", "hypothesis", "d", "N", "unlabeled_fraction",
    "trials", "alpha", "rate", "stderr", "seed", "runtime_s",
)


class SchemaError(ValueError):
    """The CSV is missing required columns; lists the absent names."""

    def __init__(self, missing):
        self.missing = sorted(missing)
        super().__init__(f"CSV is missing required columns: {', '.join(self.missing)}")


class NoDataError(ValueError):
    """No rows survive the facet/filter selection."""


@dataclass
class PlotSpec:
    """What to render: source CSV, facet, optional filters, output path."""

    csv_path: str
    facet: str
    out_path: str
    d: int | None = None
    dataset: str | None = None

    def __post_init__(self):
        if self.facet not in FACETS:
            raise ValueError(f"facet must be one of {FACETS}, got {self.facet!r}")


@dataclass
class RenderResult:
    """Output path plus the exact data series that were drawn."""

    path: str
    series: dict = field(default_factory=dict)
    alpha: float | None = None


def load_rows(csv_path) -> list[dict]:
    """Parse the sweep CSV, checking the schema before anything else."""
    with open(csv_path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = set(REQUIRED_COLUMNS) - set(header)
        if missing:
            raise SchemaError(missing)
        rows = []
        for raw in reader:
            rows.append({
                "method": raw["method"],
                "dataset": raw["dataset"],
                "hypothesis": raw["hypothesis"],
                "d": int(raw["d"]),
                "N": int(raw["N"]),
                "unlabeled_fraction": float(raw["unlabeled_fraction"]),
                "trials": int(raw["trials"]),
                "alpha": float(raw["alpha"]),
                "rate": float(raw["rate"]),
                "stderr": float(raw["stderr"]),
                "seed": raw["seed"],
                "runtime_s": float(raw["runtime_s"]),
            })
    return rows


def select_rows(rows: list[dict], spec: PlotSpec) -> list[dict]:
    hypothesis = "H0" if spec.facet == "type1_vs_N" else "H1"
    out = [r for r in rows if r["hypothesis"] == hypothesis]
    if spec.d is not None:
        out = [r for r in out if r["d"] == spec.d]
    if spec.dataset is not None:
        out = [r for r in out if r["dataset"] == spec.dataset]
    return out


def build_series(rows: list[dict]) -> dict:
    """Group rows into per-method series sorted by N."""
    series: dict = {}
    for row in rows:
        series.setdefault(row["method"], []).append(row)
    out = {}
    for method, group in sorted(series.items()):
        group = sorted(group, key=lambda r: r["N"])
        out[method] = {
            "N": [r["N"] for r in group],
            "rate": [r["rate"] for r in group],
            "stderr": [r["stderr"] for r in group],
        }
    return out


def render(spec: PlotSpec) -> RenderResult:
    """Draw the requested facet and write the image file.

    Raises :class:`SchemaError` before reading data if columns are missing
    and :class:`NoDataError` (writing nothing) if the filters leave no rows.
    """
    rows = select_rows(load_rows(spec.csv_path), spec)
    if not rows:
        raise NoDataError(
            f"no rows match facet {spec.facet!r} with filters "
            f"d={spec.d}, dataset={spec.dataset}"
        )
    series = build_series(rows)
    alpha = rows[0]["alpha"]

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    try:
        if spec.facet == "method_bars":
            _draw_bars(ax, series)
        else:
            _draw_lines(ax, series)
            if spec.facet == "type1_vs_N":
                ax.axhline(alpha, color="black", linestyle="--", linewidth=1,
                           label=f"alpha = {alpha:g}")
                ax.set_ylim(0.0, max(0.2, alpha * 3))
        ax.set_xlabel("total sample size N")
        ax.set_ylabel("rejection rate" if spec.facet != "type1_vs_N" else "type-I error")
        title = {"power_vs_N": "test power", "type1_vs_N": "type-I error",
                 "method_bars": "test power by method"}[spec.facet]
        suffix = [f"d={spec.d}" if spec.d is not None else "",
                  spec.dataset or ""]
        ax.set_title(" ".join(s for s in [title, *suffix] if s))
        ax.legend()
        fig.tight_layout()
        fig.savefig(spec.out_path)
    finally:
        plt.close(fig)
    return RenderResult(path=spec.out_path, series=series, alpha=alpha)


def _draw_lines(ax, series: dict) -> None:
    for method, data in series.items():
        ax.errorbar(data["N"], data["rate"], yerr=data["stderr"],
                    marker="o", capsize=3, label=method)


def _draw_bars(ax, series: dict) -> None:
    methods = list(series)
    all_n = sorted({n for data in series.values() for n in data["N"]})
    width = 0.8 / len(methods)
    for k, method in enumerate(methods):
        data = series[method]
        by_n = dict(zip(data["N"], zip(data["rate"], data["stderr"])))
        xs, heights, errs = [], [], []
        for i, n in enumerate(all_n):
            if n in by_n:
                xs.append(i + (k - (len(methods) - 1) / 2) * width)
                heights.append(by_n[n][0])
                errs.append(by_n[n][1])
        ax.bar(xs, heights, width=width, yerr=errs, capsize=3, label=method)
    ax.set_xticks(range(len(all_n)))
    ax.set_xticklabels([str(n) for n in all_n])
