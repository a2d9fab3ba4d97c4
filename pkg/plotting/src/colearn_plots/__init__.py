"""Figure rendering for colearn budget-search results."""

from .render import CurveReport, PlotSpec, render

__version__ = "0.1.0"
