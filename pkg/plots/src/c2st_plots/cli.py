"""Command-line entry point: plot --csv results.csv --facet power_vs_N
--d 10 --out fig.png"""

from __future__ import annotations

import argparse
import sys

from .render import FACETS, NoDataError, PlotSpec, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plot",
        description="Render power/type-I charts from a benchmark sweep CSV.",
    )
    parser.add_argument("--csv", required=True, help="sweep results CSV")
    parser.add_argument("--facet", required=True, choices=list(FACETS))
    parser.add_argument("--d", type=int, default=None, help="filter by dimension")
    parser.add_argument("--dataset", default=None, help="filter by dataset name")
    parser.add_argument("--out", required=True, help="output image path (.png/.svg)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = PlotSpec(csv_path=args.csv, facet=args.facet, out_path=args.out,
                    d=args.d, dataset=args.dataset)
    try:
        result = render(spec)
    except (SchemaError, NoDataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    n_points = sum(len(s["N"]) for s in result.series.values())
    print(f"wrote {result.path} ({len(result.series)} series, {n_points} points)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
