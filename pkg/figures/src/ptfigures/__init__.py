"""Batch panel renderer for the readout engine's CSV output.

Reads only the engine's two documented CSV schemas (delta-omega sweep
tables and transmission traces) and draws publication-style panels with
axes in units of the passive-cavity loss rate. All numbers come from the
engine; this package never computes physics.
"""

from .panels import (
    PanelSpec,
    RenderResult,
    SchemaError,
    load_sweep_table,
    load_trace_table,
    render,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "PanelSpec",
    "RenderResult",
    "SchemaError",
    "load_sweep_table",
    "load_trace_table",
    "render",
]
