"""Panel rendering: simulated moments as markers, oracle curves as lines."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .spec import FigureError, FigureSpec, load_table

_MARKERS = "osD^vP*"


def render(spec: FigureSpec) -> str:
    """Write the panel image; returns the output path.

    All requested columns are validated against every input CSV before
    any file is written, so a failed render leaves nothing behind.
    """
    tables = [load_table(path) for path in spec.csv_paths]
    oracles = spec.resolved_oracles()
    for table in tables:
        for name in list(spec.moments) + list(oracles):
            table.column(name)

    fig, ax = plt.subplots(figsize=(6.4, 4.6))
    colors = plt.rcParams["axes.prop_cycle"].by_key()["color"]

    for ci, moment in enumerate(spec.moments):
        color = colors[ci % len(colors)]
        oracle_col = oracles[ci] if ci < len(oracles) else None
        for ti, table in enumerate(tables):
            theta = table.column("theta")
            if oracle_col and ti == 0:
                ax.plot(theta, _masked(table.column(oracle_col)), "-",
                        color=color, linewidth=1.2)
            suffix = f" [{Path(table.path).stem}]" if len(tables) > 1 else ""
            ax.plot(theta, _masked(table.column(moment)),
                    _MARKERS[ci % len(_MARKERS)], color=color, markersize=4.5,
                    linestyle="none", label=moment + suffix)

    ax.set_xlabel(spec.xlabel)
    ax.set_ylabel(spec.ylabel)
    ax.set_ylim(-1.1, 1.1)
    if spec.title:
        ax.set_title(spec.title)
    ax.legend(ncols=3, fontsize=8, loc="lower right")
    ax.grid(alpha=0.25)
    fig.tight_layout()
    try:
        fig.savefig(spec.out_path, dpi=150)
    except OSError as exc:
        raise FigureError(f"cannot write {spec.out_path}: {exc}") from exc
    finally:
        plt.close(fig)
    return spec.out_path


def _masked(values):
    return [float("nan") if v is None else v for v in values]
