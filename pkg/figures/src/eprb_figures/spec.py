"""Figure specification and sweep-CSV loading.

The input format is the simulator's sweep CSV: `#` metadata lines, one
header row, then one row per theta.  Missing values are the literal
token NA.  Oracle curves are taken from the file's `*_oracle` columns,
never recomputed here, so the simulator stays the single source of truth
for the theory formulas.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path


class FigureError(Exception):
    """Anything that should abort rendering with a nonzero exit."""


DEFAULT_PAIR_MOMENTS = {
    "K": ["K12", "K13", "K14", "K23", "K24", "K34"],
    "E": ["E12", "E13", "E14", "E23", "E24", "E34"],
}


@dataclass(frozen=True)
class FigureSpec:
    """What to plot: sweep CSV inputs, moment columns, oracle overlays."""

    csv_paths: tuple[str, ...]
    moments: tuple[str, ...]
    out_path: str
    oracle_columns: tuple[str, ...] = ()   # default: "<moment>_oracle"
    title: str = ""
    xlabel: str = "theta = a - b (rad)"
    ylabel: str = "correlation"

    def resolved_oracles(self) -> tuple[str, ...]:
        if self.oracle_columns:
            return self.oracle_columns
        return tuple(f"{m}_oracle" for m in self.moments)

    @staticmethod
    def from_json(path: str) -> "FigureSpec":
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise FigureError(f"cannot read figure spec {path}: {exc}") from exc
        try:
            csv_paths = raw["csv"]
            out_path = raw["out"]
        except KeyError as exc:
            raise FigureError(f"figure spec {path} is missing the {exc} field") from exc
        if isinstance(csv_paths, str):
            csv_paths = [csv_paths]
        moments = raw.get("moments") or DEFAULT_PAIR_MOMENTS[raw.get("family", "E")]
        return FigureSpec(
            csv_paths=tuple(csv_paths),
            moments=tuple(moments),
            out_path=out_path,
            oracle_columns=tuple(raw.get("oracle_columns", ())),
            title=raw.get("title", ""),
            xlabel=raw.get("xlabel", "theta = a - b (rad)"),
            ylabel=raw.get("ylabel", "correlation"),
        )


@dataclass
class SweepTable:
    path: str
    columns: list[str]
    rows: list[dict]          # column -> float or None ("NA")
    meta: list[str] = field(default_factory=list)

    def column(self, name: str) -> list[float | None]:
        if name not in self.columns:
            raise FigureError(f"{self.path}: column {name} not found in the CSV header")
        return [row[name] for row in self.rows]


def _parse_cell(text: str) -> float | None:
    if text == "NA" or text == "":
        return None
    return float(text)


def load_table(path: str) -> SweepTable:
    meta, header, rows = [], None, []
    try:
        with open(path, newline="") as fh:
            for record in csv.reader(fh):
                if not record:
                    continue
                if record[0].lstrip().startswith("#"):
                    meta.append(",".join(record))
                    continue
                if header is None:
                    header = record
                    continue
                rows.append({name: _parse_cell(cell)
                             for name, cell in zip(header, record)})
    except OSError as exc:
        raise FigureError(f"cannot read {path}: {exc}") from exc
    if header is None or len(rows) < 2:
        raise FigureError(f"{path}: need a header and at least 2 data rows")
    table = SweepTable(path=path, columns=header, rows=rows, meta=meta)
    thetas = table.column("theta")
    if any(t is None or not math.isfinite(t) for t in thetas):
        raise FigureError(f"{path}: theta column contains non-numeric entries")
    return table
