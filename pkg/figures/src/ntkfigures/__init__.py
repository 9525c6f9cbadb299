"""Figure rendering for ntklens experiment output files."""

from .render import KINDS, FigureRequest, build_figure, render

__version__ = "0.1.0"

__all__ = ["KINDS", "FigureRequest", "build_figure", "render"]
