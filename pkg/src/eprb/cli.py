"""Command-line driver: single runs, theta sweeps, oracle curves, validation.

Output files are fully reproducible: the header records the tool version,
generator name, seed and every resolved parameter, and contains nothing
volatile, so identical invocations produce byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .core import (
    ConfigError,
    FixedPolarization,
    IdentKind,
    Learning,
    Memoryless,
    NoRetardation,
    OrthogonalRandom,
    ParallelRandom,
    PRNG_NAME,
    RunConfig,
    Topology,
    parse_angle,
)
from .experiment import (
    SweepGeometry,
    SweepRow,
    chsh_counts,
    estimate_moments,
    moment_keys,
    run,
    run_sweep,
    settings_for_theta,
)
from . import oracle

DEFAULT_SEED = 12345

ALL_KEYS = moment_keys()


def _label(prefix: str, key: tuple[int, ...]) -> str:
    return prefix + "".join(str(i) for i in key)


COLUMNS = (
    ["theta"]
    + [_label("K", k) for k in ALL_KEYS]
    + [_label("E", k) for k in ALL_KEYS]
    + [_label("K", k) + "_oracle" for k in ALL_KEYS]
    + [_label("E", k) + "_oracle" for k in ALL_KEYS]
    + ["n_coincident", "pair_ratio"]
)


class _Parser(argparse.ArgumentParser):
    """argparse that uses exit code 1 for usage errors (2 is the validate gate)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_physics_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--topology", choices=["eprb", "eeprb"], default="eeprb")
    p.add_argument("--source", choices=["orthogonal", "parallel", "fixed"],
                   default="orthogonal")
    p.add_argument("--p", type=parse_angle, default=None,
                   help="fixed polarization of photon 1 (radians or deg:X)")
    p.add_argument("--q", type=parse_angle, default=None,
                   help="fixed polarization of photon 2")
    p.add_argument("--law", choices=["none", "memoryless", "learning"],
                   default="memoryless")
    p.add_argument("--gamma", type=float, default=None,
                   help="learning rate (requires --law learning)")
    p.add_argument("--tmax", type=float, default=5000.0)
    p.add_argument("--alpha", type=float, default=4.0)
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument("--ident", choices=["local", "coincidence", "none"],
                   default="local")
    p.add_argument("--window", type=float, default=1.0)
    p.add_argument("--eta", type=float, default=1.0)
    p.add_argument("--pairs", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--cfd", action="store_true",
                   help="replay the identical stream for every grid point")


def _add_geometry_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--b", type=parse_angle, default=0.0)
    p.add_argument("--c-offset", type=parse_angle, default=np.pi / 6)
    p.add_argument("--d", type=parse_angle, default=np.pi / 3)


def _add_grid_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--grid-points", type=int, default=25)
    p.add_argument("--theta-max", type=parse_angle, default=np.pi)


def _add_output_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default="-", help="output path, - for stdout")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--oracle", default="auto",
                   choices=["auto", "maxwell", "quantum", "flipped", "product", "none"],
                   help="comparison model for the oracle columns")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="eprb", description=__doc__)
    parser.add_argument("--version", action="version", version=f"eprb-sim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_run = sub.add_parser("run", help="simulate a single setting")
    p_run.add_argument("--theta", type=parse_angle, default=0.0,
                       help="a - b for this run")
    for add in (_add_physics_flags, _add_geometry_flags, _add_output_flags):
        add(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="simulate a theta grid")
    for add in (_add_physics_flags, _add_geometry_flags, _add_grid_flags,
                _add_output_flags):
        add(p_sweep)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_oracle = sub.add_parser("oracle", help="print closed-form curves only (no simulation)")
    for add in (_add_physics_flags, _add_geometry_flags, _add_grid_flags,
                _add_output_flags):
        add(p_oracle)
    p_oracle.set_defaults(func=_cmd_oracle)

    p_val = sub.add_parser("validate", help="run the acceptance suite, one line per criterion")
    p_val.add_argument("--only", default=None,
                       help="comma-separated criterion numbers, e.g. 1,2,10")
    p_val.set_defaults(func=_cmd_validate)

    return parser


# --------------------------------------------------------------------------
# Config and oracle assembly
# --------------------------------------------------------------------------

def _build_config(args, theta: float) -> RunConfig:
    if args.source == "fixed":
        if args.p is None or args.q is None:
            raise ConfigError("--source fixed requires --p and --q")
        source = FixedPolarization(args.p, args.q)
    else:
        if (args.p is not None or args.q is not None) and args.oracle != "product":
            raise ConfigError("--p/--q need --source fixed (or --oracle product)")
        source = OrthogonalRandom() if args.source == "orthogonal" else ParallelRandom()

    if args.law == "learning":
        if args.gamma is None:
            raise ConfigError("--law learning requires --gamma")
        law = Learning(args.gamma)
    else:
        if args.gamma is not None:
            raise ConfigError("--gamma requires --law learning")
        law = NoRetardation() if args.law == "none" else Memoryless()

    geom = SweepGeometry(b=args.b, c_offset=args.c_offset, d=args.d)
    cfg = RunConfig(
        settings=settings_for_theta(theta, geom),
        seed=args.seed,
        topology=Topology(args.topology),
        source=source,
        law=law,
        t_max=args.tmax,
        alpha=args.alpha,
        beta=args.beta,
        identification=IdentKind(args.ident),
        window=args.window,
        eta=args.eta,
        n_pairs=args.pairs,
        cfd=args.cfd,
    )
    cfg.validate()
    return cfg


def _oracle_tables(name: str, cfg: RunConfig):
    """(K-oracle, E-oracle) moment dicts for one grid point, or (None, None)."""
    s = cfg.settings
    if name == "none":
        return None, None
    if name == "auto":
        return oracle.reference_moments(cfg.source, s)
    if name == "maxwell":
        phi0 = 0.0 if isinstance(cfg.source, ParallelRandom) else np.pi / 2
        m = oracle.maxwell_moments(s, phi0=phi0)
        return m, dict(m)
    if name == "quantum":
        m = oracle.quantum_moments(s)
        return m, dict(m)
    if name == "flipped":
        m = oracle.flipped_moments(s)
        return m, dict(m)
    if name == "product":
        if isinstance(cfg.source, FixedPolarization):
            p, q = cfg.source.p, cfg.source.q
        else:
            p, q = None, None
        m = oracle.product_moments(s, p, q)
        return m, dict(m)
    raise ConfigError(f"unknown oracle model {name}")


def _oracle_product_angles(args) -> None:
    if args.oracle == "product" and args.source != "fixed":
        if args.p is None or args.q is None:
            raise ConfigError("--oracle product requires --p and --q")


# --------------------------------------------------------------------------
# Table assembly and serialization
# --------------------------------------------------------------------------

def _row_values(theta, moments, k_oracle, e_oracle, n_pairs):
    """One output row in COLUMNS order; None marks missing values."""
    row = [theta]
    have = moments.k if moments is not None else {}
    for key in ALL_KEYS:
        row.append(moments.k.get(key) if moments else None)
    for key in ALL_KEYS:
        row.append(moments.e.get(key) if moments else None)
    for table in (k_oracle, e_oracle):
        for key in ALL_KEYS:
            if table is None or (moments is not None and key not in have):
                row.append(None)
            else:
                row.append(table[key])
    if moments is None:
        row += [None, None]
    else:
        row += [moments.n_coincident, moments.n_coincident / n_pairs]
    return row


def _fmt_cell(v) -> str:
    if v is None:
        return "NA"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _write_table(args, meta: dict, rows: list[list]) -> None:
    if args.format == "csv":
        lines = [f"# {k}: {v}" for k, v in meta.items()]
        lines.append(",".join(COLUMNS))
        lines += [",".join(_fmt_cell(v) for v in row) for row in rows]
        text = "\n".join(lines) + "\n"
    else:
        payload = dict(meta)
        payload["columns"] = COLUMNS
        payload["rows"] = [[None if v is None else (int(v) if isinstance(v, (int, np.integer)) else float(v)) for v in row]
                           for row in rows]
        text = json.dumps(payload, sort_keys=True, indent=1) + "\n"
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w") as fh:
            fh.write(text)


def _meta(args, command: str) -> dict:
    params = {k: v for k, v in sorted(vars(args).items())
              if k not in ("func", "out", "command")}
    return {
        "tool": f"eprb-sim {__version__}",
        "command": command,
        "prng": PRNG_NAME,
        "seed": getattr(args, "seed", None),
        "params": json.dumps(params, sort_keys=True, default=str),
    }


# --------------------------------------------------------------------------
# Subcommands
# --------------------------------------------------------------------------

def _cmd_run(args) -> int:
    _oracle_product_angles(args)
    cfg = _build_config(args, args.theta)
    ds = run(cfg)
    m = estimate_moments(ds)
    ko, eo = _oracle_tables(args.oracle, _cfg_for_oracle(cfg, args))
    _write_table(args, _meta(args, "run"),
                 [_row_values(args.theta, m, ko, eo, cfg.n_pairs)])
    return 0


def _cfg_for_oracle(cfg: RunConfig, args) -> RunConfig:
    # the product oracle may take p/q from flags even for random sources
    if args.oracle == "product" and not isinstance(cfg.source, FixedPolarization):
        from dataclasses import replace
        return replace(cfg, source=FixedPolarization(args.p, args.q))
    return cfg


def _thetas(args) -> np.ndarray:
    if args.grid_points < 1:
        raise ConfigError(f"--grid-points must be >= 1, got {args.grid_points}")
    return np.linspace(0.0, args.theta_max, args.grid_points)


def _cmd_sweep(args) -> int:
    _oracle_product_angles(args)
    base = _build_config(args, 0.0)
    geom = SweepGeometry(b=args.b, c_offset=args.c_offset, d=args.d)
    rows = run_sweep(base, _thetas(args), geom)
    out = []
    for r in rows:
        ko, eo = _oracle_tables(args.oracle, _cfg_for_oracle(r.config, args))
        out.append(_row_values(r.theta, r.moments, ko, eo, r.config.n_pairs))
    _write_table(args, _meta(args, "sweep"), out)
    return 0


def _cmd_oracle(args) -> int:
    _oracle_product_angles(args)
    base = _build_config(args, 0.0)
    geom = SweepGeometry(b=args.b, c_offset=args.c_offset, d=args.d)
    out = []
    for theta in _thetas(args):
        from dataclasses import replace
        cfg = replace(base, settings=settings_for_theta(float(theta), geom))
        ko, eo = _oracle_tables(args.oracle, _cfg_for_oracle(cfg, args))
        out.append(_row_values(float(theta), None, ko, eo, cfg.n_pairs))
    _write_table(args, _meta(args, "oracle"), out)
    return 0


def _cmd_validate(args) -> int:
    from . import acceptance

    if args.only:
        try:
            selected = sorted({int(tok) for tok in args.only.split(",")})
        except ValueError:
            raise ConfigError(f"--only expects comma-separated integers, got {args.only!r}")
        unknown = [n for n in selected if n not in acceptance.ALL]
        if unknown:
            raise ConfigError(f"unknown criterion numbers {unknown}; available: {sorted(acceptance.ALL)}")
    else:
        selected = None
    results = acceptance.run_criteria(selected)
    for res in results:
        print(res.report_line())
        for check in res.checks:
            if not check.passed:
                print(f"    FAIL {check.name}: {check.detail}")
    return 0 if all(r.passed for r in results) else 2


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"eprb: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"eprb: error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
