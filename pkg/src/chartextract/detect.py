"""Non-neural baseline detectors built on connected-component analysis.

detect_bars finds solidly shaded rectangular marks; detect_points emits
component centroids for scatter markers.  Both estimate the background
color from the plot border and operate only inside the plot area.  The
point detector deliberately keeps the classic failure mode: markers that
touch fuse into one component and yield a single centroid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import BoundingBox, DetectionSet, Point2D
from .raster.image import ImageBuffer
from .raster.kernels import dilate, erode
from .raster.ops import label_mask


@dataclass(frozen=True)
class BarDetectParams:
    plot_bb: BoundingBox
    background_tolerance: int = 12
    min_area: int = 20
    min_fill_ratio: float = 0.85

    def __post_init__(self):
        if not 0 <= self.background_tolerance <= 255:
            raise ValueError("background_tolerance must be in 0..255")
        if not 0.0 < self.min_fill_ratio <= 1.0:
            raise ValueError("min_fill_ratio must be in (0,1]")


@dataclass(frozen=True)
class PointDetectParams:
    plot_bb: BoundingBox
    background_tolerance: int = 12
    min_area: int = 4
    max_area: int = 400

    def __post_init__(self):
        if not 0 <= self.background_tolerance <= 255:
            raise ValueError("background_tolerance must be in 0..255")
        if self.min_area > self.max_area:
            raise ValueError("min_area must be <= max_area")


def _plot_slice(img: ImageBuffer, plot_bb: BoundingBox) -> tuple[int, int, int, int]:
    x0 = max(0, int(round(plot_bb.x0)))
    y0 = max(0, int(round(plot_bb.y0)))
    x1 = min(img.width, int(round(plot_bb.x1)))
    y1 = min(img.height, int(round(plot_bb.y1)))
    if x1 - x0 <= 0 or y1 - y0 <= 0:
        raise ValueError("degenerate plot area")
    return x0, y0, x1, y1


def _pack(rgb: np.ndarray) -> np.ndarray:
    p = rgb.astype(np.uint32)
    return (p[..., 0] << 16) | (p[..., 1] << 8) | p[..., 2]


def _modal_color(rgb_pixels: np.ndarray) -> np.ndarray:
    packed = _pack(rgb_pixels.reshape(-1, 3))
    values, counts = np.unique(packed, return_counts=True)
    mode = values[np.argmax(counts)]
    return np.array([(mode >> 16) & 255, (mode >> 8) & 255, mode & 255], dtype=np.uint8)


def estimate_background(img: ImageBuffer, plot_bb: BoundingBox) -> np.ndarray:
    """Modal color of the one-pixel ring just inside the plot boundary."""
    x0, y0, x1, y1 = _plot_slice(img, plot_bb)
    arr = img.array
    ring = [arr[y0, x0:x1], arr[y1 - 1, x0:x1], arr[y0:y1, x0], arr[y0:y1, x1 - 1]]
    return _modal_color(np.concatenate([r.reshape(-1, 3) for r in ring]))


def _foreground_mask(crop: np.ndarray, background: np.ndarray, tolerance: int) -> np.ndarray:
    dev = np.abs(crop.astype(np.int16) - background.astype(np.int16)).max(axis=2)
    return (dev > tolerance).astype(np.uint8)


def _erase_gridlines(mask: np.ndarray, crop: np.ndarray, tolerance: int) -> np.ndarray:
    """Erase full-width rows / full-height columns of near-constant color.

    A gridline that spans the whole plot in one uniform color is not a data
    mark; runs interrupted by bars or markers are left alone.
    """
    out = mask.copy()
    h, w = mask.shape
    for axis, full in ((0, w), (1, h)):
        # axis==0 scans rows, axis==1 scans columns
        counts = mask.sum(axis=1) if axis == 0 else mask.sum(axis=0)
        for idx in np.flatnonzero(counts >= 0.99 * full):
            line = crop[idx, :, :] if axis == 0 else crop[:, idx, :]
            fg = mask[idx, :] if axis == 0 else mask[:, idx]
            pix = line[fg > 0]
            if pix.size and (pix.max(axis=0).astype(int) - pix.min(axis=0).astype(int)).max() <= 2:
                if axis == 0:
                    out[idx, :] = 0
                else:
                    out[:, idx] = 0
    return out


def _component_slices(labels: np.ndarray, count: int):
    ys, xs = np.nonzero(labels)
    lab = labels[ys, xs]
    order = np.argsort(lab, kind="stable")
    ys, xs, lab = ys[order], xs[order], lab[order]
    bounds = np.searchsorted(lab, np.arange(1, count + 2))
    for k in range(count):
        yield ys[bounds[k] : bounds[k + 1]], xs[bounds[k] : bounds[k + 1]]


def detect_bars(img: ImageBuffer, p: BarDetectParams) -> DetectionSet:
    """CC-analysis bar detector: solid, rectangular, single-color components."""
    if img.channels != "rgb8":
        raise ValueError("detect_bars requires an rgb8 image")
    x0, y0, x1, y1 = _plot_slice(img, p.plot_bb)
    crop = img.array[y0:y1, x0:x1]
    background = estimate_background(img, p.plot_bb)
    mask = _foreground_mask(crop, background, p.background_tolerance)
    mask = _erase_gridlines(mask, crop, p.background_tolerance)
    mask = dilate(erode(mask, 1), 1)
    labels, count = label_mask(mask, connectivity=8)

    boxes: list[tuple[BoundingBox, float]] = []
    for ys, xs in _component_slices(labels, count):
        area = ys.size
        if area < p.min_area:
            continue
        colors = crop[ys, xs]
        modal = _modal_color(colors)
        dev = np.abs(colors.astype(np.int16) - modal.astype(np.int16)).max(axis=1)
        if (dev <= p.background_tolerance).mean() < 0.90:
            continue
        bx0, bx1 = int(xs.min()), int(xs.max()) + 1
        by0, by1 = int(ys.min()), int(ys.max()) + 1
        fill = area / float((bx1 - bx0) * (by1 - by0))
        if fill < p.min_fill_ratio:
            continue
        boxes.append(
            (BoundingBox(bx0 + x0, by0 + y0, bx1 + x0, by1 + y0), min(1.0, fill))
        )
    boxes.sort(key=lambda item: (item[0].y0, item[0].x0, item[0].x1))
    return DetectionSet("", "boxes", boxes=tuple(boxes))


def detect_points(img: ImageBuffer, p: PointDetectParams) -> DetectionSet:
    """CC-analysis point detector; fused blobs collapse to one centroid."""
    if img.channels != "rgb8":
        raise ValueError("detect_points requires an rgb8 image")
    x0, y0, x1, y1 = _plot_slice(img, p.plot_bb)
    crop = img.array[y0:y1, x0:x1]
    background = estimate_background(img, p.plot_bb)
    mask = _foreground_mask(crop, background, p.background_tolerance)
    mask = _erase_gridlines(mask, crop, p.background_tolerance)
    labels, count = label_mask(mask, connectivity=8)

    comps = []
    for ys, xs in _component_slices(labels, count):
        area = ys.size
        if area < p.min_area:
            continue
        cx = float(xs.mean()) + 0.5 + x0
        cy = float(ys.mean()) + 0.5 + y0
        comps.append((area, Point2D(cx, cy)))
    in_range = [a for a, _ in comps if a <= p.max_area]
    if in_range:
        median_area = float(np.median(in_range))
    elif comps:
        median_area = float(np.median([a for a, _ in comps]))
    else:
        median_area = 0.0
    points = []
    for area, center in comps:
        score = max(0.0, min(1.0, 1.0 - abs(area - median_area) / p.max_area))
        points.append((center, score))
    points.sort(key=lambda item: (item[0].y, item[0].x))
    return DetectionSet("", "points", points=tuple(points))
