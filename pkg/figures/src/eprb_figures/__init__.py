"""Figure rendering for correlation-sweep CSV files."""

__version__ = "0.1.0"

from .spec import FigureSpec, SweepTable, load_table
from .render import render

__all__ = ["FigureSpec", "SweepTable", "load_table", "render", "__version__"]
