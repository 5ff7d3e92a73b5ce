"""Offline rendering of blind-calibration sweep CSVs."""

from .csvio import Cell, Row, SchemaError, aggregate, read_rows
from .render import PLOT_KINDS, PlotSpec, gray_level, render, render_figure

__version__ = "0.1.0"
