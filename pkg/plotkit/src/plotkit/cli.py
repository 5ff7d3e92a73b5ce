"""plotkit command line: render sweep CSVs to figures.

Exit codes: 0 success, 2 bad arguments or schema mismatch, 3 I/O error.
"""

from __future__ import annotations

import argparse
import sys

from .csvio import SchemaError
from .render import PLOT_KINDS, PlotSpec, render


def _parse_overlays(items):
    overlays = []
    for item in items or ():
        if item == "alpha_min":
            overlays.append("alpha_min")
            continue
        label, sep, value = item.partition("=")
        if not sep or not label:
            raise ValueError(f"overlay must be 'alpha_min' or label=value, got {item!r}")
        overlays.append((label, float(value)))
    return tuple(overlays)


def build_parser():
    parser = argparse.ArgumentParser(prog="plotkit", description="Render sweep grid CSVs.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="render one figure from a grid CSV")
    p.add_argument("--csv", required=True, help="grid CSV produced by the sweep harness")
    p.add_argument("--kind", required=True, choices=PLOT_KINDS)
    p.add_argument("--out", required=True, help="output image path")
    p.add_argument(
        "--overlay", action="append", default=[], metavar="ALPHA_MIN|LABEL=VALUE",
        help="overlay line: 'alpha_min' or a labeled constant, repeatable",
    )
    p.add_argument("--success-threshold", type=float, default=1e-8)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        spec = PlotSpec(
            csv_path=args.csv,
            kind=args.kind,
            out_path=args.out,
            overlays=_parse_overlays(args.overlay),
            success_threshold=args.success_threshold,
        )
        render(spec)
    except SchemaError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 3
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
