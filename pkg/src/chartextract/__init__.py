"""Chart data extraction: keypoint heatmaps, classical detectors, pixel-to-value
conversion, competition-style scoring, and a deterministic synthetic generator.

Hot raster kernels (connected components, morphology) have a compiled
implementation with a pure-Python fallback; see chartextract.raster.
"""

from .errors import AxisFitError, ChartExtractError, ParseError
from .model import (
    Axis,
    BoundingBox,
    BoxplotRecord,
    CategoryRecord,
    ChartAnnotation,
    ChartType,
    DataSeries,
    DetectionSet,
    LegendEntry,
    Orientation,
    Point2D,
    ScaleKind,
    TickPoint,
    XYRecord,
)

__version__ = "0.1.0"

__all__ = [
    "Axis",
    "AxisFitError",
    "BoundingBox",
    "BoxplotRecord",
    "CategoryRecord",
    "ChartAnnotation",
    "ChartExtractError",
    "ChartType",
    "DataSeries",
    "DetectionSet",
    "LegendEntry",
    "Orientation",
    "ParseError",
    "Point2D",
    "ScaleKind",
    "TickPoint",
    "XYRecord",
    "__version__",
]
