#!/usr/bin/env python3
"""CHSH demonstration at the optimal settings.

Runs the two-splitter-per-arm experiment once per CHSH setting pair in
counterfactually definite mode (identical pseudo-random stream for every
setting) and prints the multi-run CHSH value next to the single-run
combination, which respects the algebraic bound of 2 by construction.
"""

import argparse
import sys

import numpy as np

from eprb.core import RunConfig, Settings, Topology
from eprb.experiment import chsh_multi_run, chsh_single_run, estimate_moments, run


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--pairs", type=int, default=1_000_000)
    ap.add_argument("--seed", type=int, default=12345)
    args = ap.parse_args()

    a, ap_, b, bp = 0.0, np.pi / 4, np.pi / 8, 3 * np.pi / 8

    print("EPRB runs (one beam splitter per arm), identified pairs:")
    e12 = {}
    for label, (sa, sb) in {"ab": (a, b), "ab'": (a, bp),
                            "a'b": (ap_, b), "a'b'": (ap_, bp)}.items():
        cfg = RunConfig(settings=Settings(a=sa, b=sb), seed=args.seed,
                        topology=Topology.EPRB, n_pairs=args.pairs, cfd=True)
        m = estimate_moments(run(cfg))
        e12[label] = m.e[(1, 2)]
        print(f"  E({label}) = {e12[label]:+.4f}   ({m.n_coincident} coincident pairs)")
    multi = chsh_multi_run(e12["ab"], e12["ab'"], e12["a'b"], e12["a'b'"])
    print(f"  multi-run CHSH = {multi:.4f}   (2*sqrt(2) = {2 * np.sqrt(2):.4f})")

    print("single EEPRB run (two beam splitters per arm):")
    cfg = RunConfig(settings=Settings(a=a, b=b, c=ap_, d=bp), seed=args.seed,
                    n_pairs=args.pairs)
    k_val, e_val = chsh_single_run(estimate_moments(run(cfg)))
    print(f"  E13+E14+E23-E24 = {e_val:+.4f}  (bounded by 2 for every dataset)")
    print(f"  K analogue      = {k_val:+.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
