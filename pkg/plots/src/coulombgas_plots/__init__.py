"""Figure renderers for the coulombgas CLI's delimited outputs.

This package reads only the documented file formats (trajectory CSV, chain
CSV, slack CSV, diagnostics JSON) and never imports the simulation library,
so either side can be installed and upgraded alone.
"""

__version__ = "0.1.0"

from .common import PlotSpec, SchemaError, render

__all__ = ["PlotSpec", "SchemaError", "render"]
