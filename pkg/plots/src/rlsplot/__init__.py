"""Figure rendering for the networked sparse RLS simulator's CSV outputs."""

from rlsplot.errors import EmptyInput, MissingColumn, PlotError
from rlsplot.figures import KINDS, REQUIRED_COLUMNS, FigureSpec, RenderResult, render

__version__ = "0.1.0"

__all__ = [
    "EmptyInput",
    "FigureSpec",
    "KINDS",
    "MissingColumn",
    "PlotError",
    "RenderResult",
    "REQUIRED_COLUMNS",
    "render",
    "__version__",
]
