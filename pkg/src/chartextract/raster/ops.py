"""Morphology, connected-component labeling, and component statistics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..model import BoundingBox, Point2D
from . import kernels
from .image import ImageBuffer


@dataclass(frozen=True)
class LabelMap:
    """Row-major component labels; 0 is background, 1..component_count are
    components in raster-scan order of their first pixel."""

    width: int
    height: int
    labels: np.ndarray
    component_count: int

    def __post_init__(self):
        arr = np.ascontiguousarray(self.labels, dtype=np.int32)
        arr.flags.writeable = False
        object.__setattr__(self, "labels", arr)


@dataclass(frozen=True)
class ComponentStats:
    label: int
    area: int
    bbox: BoundingBox
    centroid: Point2D


def _binary_mask(img: ImageBuffer) -> np.ndarray:
    if img.channels != "gray8":
        raise ValueError("binary operations require a gray8 image")
    return (img.array > 0).astype(np.uint8)


def morph_open(img: ImageBuffer, radius: int) -> ImageBuffer:
    """Erosion then dilation with a (2*radius+1)-square structuring element."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    mask = _binary_mask(img)
    opened = kernels.dilate(kernels.erode(mask, radius), radius)
    return ImageBuffer((opened * np.uint8(255)))


def label_components(img: ImageBuffer, connectivity: int = 8) -> LabelMap:
    if connectivity not in (4, 8):
        raise ValueError("connectivity must be 4 or 8")
    mask = _binary_mask(img)
    labels, count = kernels.label(mask, connectivity)
    return LabelMap(img.width, img.height, labels, count)


def label_mask(mask: np.ndarray, connectivity: int = 8) -> tuple[np.ndarray, int]:
    """Label a raw 0/1 mask array directly (internal fast path)."""
    if connectivity not in (4, 8):
        raise ValueError("connectivity must be 4 or 8")
    return kernels.label(np.ascontiguousarray(mask, dtype=np.uint8), connectivity)


def component_stats(lm: LabelMap) -> list[ComponentStats]:
    """Per-label area, tight bbox, and pixel-center centroid.

    Pixel (row i, col j) has center (j+0.5, i+0.5); the tight bbox of a
    component spans the pixel edges, e.g. a single pixel at (3, 7) yields
    bbox (7, 3, 8, 4) and centroid (7.5, 3.5).
    """
    n = lm.component_count
    if n == 0:
        return []
    ys, xs = np.nonzero(lm.labels)
    lab = lm.labels[ys, xs]
    areas = np.bincount(lab, minlength=n + 1)
    sum_x = np.bincount(lab, weights=xs + 0.5, minlength=n + 1)
    sum_y = np.bincount(lab, weights=ys + 0.5, minlength=n + 1)
    min_x = np.full(n + 1, lm.width, dtype=np.int64)
    min_y = np.full(n + 1, lm.height, dtype=np.int64)
    max_x = np.zeros(n + 1, dtype=np.int64)
    max_y = np.zeros(n + 1, dtype=np.int64)
    np.minimum.at(min_x, lab, xs)
    np.minimum.at(min_y, lab, ys)
    np.maximum.at(max_x, lab, xs)
    np.maximum.at(max_y, lab, ys)
    out = []
    for k in range(1, n + 1):
        area = int(areas[k])
        out.append(
            ComponentStats(
                label=k,
                area=area,
                bbox=BoundingBox(float(min_x[k]), float(min_y[k]), float(max_x[k] + 1), float(max_y[k] + 1)),
                centroid=Point2D(sum_x[k] / area, sum_y[k] / area),
            )
        )
    return out
