"""Figure rendering for bench trace CSVs."""

from .figspec import AGGREGATES, PANELS, FigureSpec, FigureSpecError, TraceInput
from .render import band_bounds, mean_std_band, panel_series, render, resolve_fstar
from .traces import COLUMNS, TRACE_HEADER, TraceSchemaError, load_trace

__all__ = [name for name in dir() if not name.startswith("_")]
