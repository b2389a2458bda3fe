"""figures: render sweep CSVs as marker/curve panels.

Either point it at a JSON figure spec:

    figures fig.json

or describe the figure with flags:

    figures --csv quantum.csv --family E --out quantum.png --title "W = 1"
"""

from __future__ import annotations

import argparse
import sys

from .spec import DEFAULT_PAIR_MOMENTS, FigureError, FigureSpec
from .render import render


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="figures", description=__doc__)
    p.add_argument("spec", nargs="?", help="JSON figure spec (alternative to flags)")
    p.add_argument("--csv", action="append", default=[], help="input sweep CSV (repeatable)")
    p.add_argument("--moments", default=None,
                   help="comma-separated columns to mark, e.g. K12,K13")
    p.add_argument("--family", choices=["K", "E"], default="E",
                   help="plot the six pair moments of this family (default E)")
    p.add_argument("--oracle-columns", default=None,
                   help="comma-separated overlay columns (default <moment>_oracle)")
    p.add_argument("--out", default=None, help="output image path")
    p.add_argument("--title", default="")
    p.add_argument("--xlabel", default="theta = a - b (rad)")
    p.add_argument("--ylabel", default="correlation")
    return p


def spec_from_args(args) -> FigureSpec:
    if args.spec:
        return FigureSpec.from_json(args.spec)
    if not args.csv or not args.out:
        raise FigureError("need either a JSON spec or both --csv and --out")
    moments = (tuple(args.moments.split(",")) if args.moments
               else tuple(DEFAULT_PAIR_MOMENTS[args.family]))
    oracle_columns = tuple(args.oracle_columns.split(",")) if args.oracle_columns else ()
    return FigureSpec(csv_paths=tuple(args.csv), moments=moments,
                      out_path=args.out, oracle_columns=oracle_columns,
                      title=args.title, xlabel=args.xlabel, ylabel=args.ylabel)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        out = render(spec_from_args(args))
    except FigureError as exc:
        print(f"figures: error: {exc}", file=sys.stderr)
        return 1
    print(out)
    return 0


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
