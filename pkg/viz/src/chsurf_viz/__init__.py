"""Plotting tools for solver outputs: energy-curve figures from diagnostics
CSV files and heatmap panels from CHSF field snapshots."""

from .chsf import ChsfError, Snapshot, read_chsf
from .plots import PlotJob, plot_energy, plot_fields
from .series import SeriesError, read_series

__all__ = [
    "ChsfError",
    "PlotJob",
    "SeriesError",
    "Snapshot",
    "plot_energy",
    "plot_fields",
    "read_chsf",
    "read_series",
]
