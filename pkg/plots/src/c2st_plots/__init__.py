"""Charts for benchmark sweep CSVs: power and type-I error per method."""

from .render import (
    FACETS,
    NoDataError,
    PlotSpec,
    RenderResult,
    SchemaError,
    load_rows,
    render,
)

__version__ = "0.1.0"

__all__ = [
    "FACETS",
    "NoDataError",
    "PlotSpec",
    "RenderResult",
    "SchemaError",
    "load_rows",
    "render",
]
