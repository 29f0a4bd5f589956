"""Shared imaging primitives.

Hot kernels (connected-component labeling, binary erosion/dilation) exist
twice: a Cython extension built at install time and a pure NumPy fallback.
``chartextract.raster.kernels.BACKEND`` reports which one is active;
setting the environment variable ``CHARTEXTRACT_PURE=1`` forces the
fallback.
"""

from .image import ImageBuffer, binarize, decode_image, encode_image, to_gray
from .ops import LabelMap, ComponentStats, component_stats, label_components, morph_open

__all__ = [
    "ImageBuffer",
    "LabelMap",
    "ComponentStats",
    "binarize",
    "component_stats",
    "decode_image",
    "encode_image",
    "label_components",
    "morph_open",
    "to_gray",
]
