"""Command line front end: render one figure from one or more CSV files.

Usage:
    mtrls-plot --kind learning_curve --in results/learning_curve.csv --out fig.png
    mtrls-plot --kind per_node --in results/per_node.csv --out nodes.pdf --logy
    mtrls-plot --kind sweep --in sweep/sweep.csv --out sweep.png --title "beta sweep"
"""

from __future__ import annotations

import argparse
import sys

from rlsplot.errors import PlotError
from rlsplot.figures import KINDS, FigureSpec, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mtrls-plot",
        description="Render simulator CSV outputs (learning curves, per-node "
        "bars, sweep charts) to image files.",
    )
    parser.add_argument("--kind", required=True, choices=sorted(KINDS))
    parser.add_argument(
        "--in",
        dest="source",
        required=True,
        nargs="+",
        metavar="CSV",
        help="input CSV file(s); several files are concatenated row-wise",
    )
    parser.add_argument(
        "--out", required=True, help="output image path (.png, .pdf, .svg, ...)"
    )
    parser.add_argument("--title", default=None, help="figure title")
    parser.add_argument("--xlabel", default=None, help="override the x axis label")
    parser.add_argument("--ylabel", default=None, help="override the y axis label")
    parser.add_argument("--logy", action="store_true", help="logarithmic y axis")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(
        source=tuple(args.source),
        kind=args.kind,
        out=args.out,
        title=args.title,
        xlabel=args.xlabel,
        ylabel=args.ylabel,
        logy=args.logy,
    )
    try:
        result = render(spec)
    except (PlotError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {result.path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
