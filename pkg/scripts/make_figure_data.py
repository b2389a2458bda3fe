#!/usr/bin/env python3
"""Generate the sweep CSVs behind the standard correlation figures.

Four files land in the output directory:

  maxwell.csv   orthogonal source, no identification  (K panel)
  quantum.csv   orthogonal source, local window W=1   (E panel)
  parallel.csv  parallel source, local window W=1     (K and E panels)
  fixed.csv     fixed source polarizations            (product model)

Pass --pairs to trade statistics for speed (default 1e6 per grid point,
a few minutes in total).
"""

import argparse
import pathlib
import sys

from eprb import cli


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default="data")
    ap.add_argument("--pairs", type=int, default=1_000_000)
    ap.add_argument("--grid-points", type=int, default=25)
    ap.add_argument("--seed", type=int, default=cli.DEFAULT_SEED)
    args = ap.parse_args()

    outdir = pathlib.Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    common = ["--pairs", str(args.pairs), "--grid-points", str(args.grid_points),
              "--seed", str(args.seed)]
    jobs = {
        "maxwell.csv": ["sweep", "--source", "orthogonal", "--law", "none",
                        "--ident", "none"],
        "quantum.csv": ["sweep", "--source", "orthogonal", "--ident", "local",
                        "--window", "1"],
        "parallel.csv": ["sweep", "--source", "parallel", "--ident", "local",
                         "--window", "1"],
        "fixed.csv": ["sweep", "--source", "fixed", "--p", "0.3", "--q", "1.2"],
    }
    for name, flags in jobs.items():
        path = outdir / name
        print(f"writing {path} ...", flush=True)
        rc = cli.main(flags + common + ["--out", str(path)])
        if rc != 0:
            return rc
    return 0


if __name__ == "__main__":
    sys.exit(main())
