"""Gaussian keypoint heatmap encoding and decoding.

Encoding stamps a unit-peak Gaussian at every target point and keeps the
per-cell maximum where kernels overlap.  Decoding thresholds the map,
extracts 8-connected regions, and emits one value-weighted centroid per
region, splitting oversized regions into multiple peaks deterministically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import BoundingBox, Point2D
from .raster.image import ImageBuffer
from .raster.ops import label_mask

TRUNCATION_SIGMAS = 4.0


@dataclass(frozen=True)
class GaussianParams:
    sigma: float = 2.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be > 0")


@dataclass(frozen=True)
class DecodeParams:
    confidence_threshold: float = 0.5
    plot_bb: BoundingBox | None = None
    split_area_factor: float = 4.0
    sigma: float = 2.0  # kernel size the map was produced with; sets A_ref

    def __post_init__(self):
        if not 0.0 < self.confidence_threshold < 1.0:
            raise ValueError("confidence_threshold must be in (0,1)")
        if not self.split_area_factor > 1.0:
            raise ValueError("split_area_factor must be > 1")
        if not self.sigma > 0:
            raise ValueError("sigma must be > 0")


class Heatmap:
    """Single-channel float mask, values in [0,1], row-major."""

    def __init__(self, values: np.ndarray):
        arr = np.ascontiguousarray(values, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("heatmap must be 2-D with dimensions >= 1")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueError("heatmap values must lie in [0,1]")
        arr.flags.writeable = False
        self._values = arr

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def width(self) -> int:
        return self._values.shape[1]

    @property
    def height(self) -> int:
        return self._values.shape[0]


def mask_radius(sigma: float, threshold: float) -> float:
    """Radius of the Gaussian level set at the given threshold value."""
    if not 0.0 < threshold <= 1.0:
        raise ValueError("threshold must be in (0,1]")
    return sigma * math.sqrt(2.0 * math.log(1.0 / threshold))


def reference_mask_area(sigma: float, threshold: float) -> int:
    """Cell count of a single thresholded kernel centered on a cell center.

    Counts integer lattice offsets within the level-set radius; this is the
    area an isolated point contributes to the thresholded mask.
    """
    r = mask_radius(sigma, threshold)
    ri = int(math.floor(r))
    count = 0
    for dy in range(-ri, ri + 1):
        for dx in range(-ri, ri + 1):
            if dx * dx + dy * dy <= r * r:
                count += 1
    return count


def encode(points: list[Point2D], width: int, height: int,
           params: GaussianParams = GaussianParams()) -> Heatmap:
    """Render points as a max-combined Gaussian heatmap.

    The Gaussian is evaluated at cell centers (col+0.5, row+0.5) and
    truncated to zero beyond TRUNCATION_SIGMAS * sigma.
    """
    values = np.zeros((height, width), dtype=np.float64)
    sigma = params.sigma
    reach = TRUNCATION_SIGMAS * sigma
    for p in points:
        if not (0.0 <= p.x < width and 0.0 <= p.y < height):
            raise ValueError(f"point ({p.x},{p.y}) outside canvas {width}x{height}")
        c0 = max(0, int(math.floor(p.x - reach - 0.5)))
        c1 = min(width, int(math.ceil(p.x + reach - 0.5)) + 1)
        r0 = max(0, int(math.floor(p.y - reach - 0.5)))
        r1 = min(height, int(math.ceil(p.y + reach - 0.5)) + 1)
        xs = np.arange(c0, c1, dtype=np.float64) + 0.5 - p.x
        ys = np.arange(r0, r1, dtype=np.float64) + 0.5 - p.y
        d2 = ys[:, None] ** 2 + xs[None, :] ** 2
        g = np.exp(-d2 / (2.0 * sigma * sigma))
        g[d2 > reach * reach] = 0.0
        window = values[r0:r1, c0:c1]
        np.maximum(window, g, out=window)
    return Heatmap(values)


def decode(h: Heatmap, d: DecodeParams = DecodeParams()) -> list[Point2D]:
    """Recover point centers from a heatmap.

    Regions no larger than split_area_factor reference areas emit their
    value-weighted centroid.  Larger regions emit round(area / A_ref)
    peaks: repeatedly take the strongest remaining cell and suppress a
    disc of radius 2*sigma around it.  Output is sorted by (y, x).
    """
    values = h.values.copy()
    if d.plot_bb is not None:
        cols = np.arange(h.width) + 0.5
        rows = np.arange(h.height) + 0.5
        inside = (
            (rows[:, None] >= d.plot_bb.y0)
            & (rows[:, None] <= d.plot_bb.y1)
            & (cols[None, :] >= d.plot_bb.x0)
            & (cols[None, :] <= d.plot_bb.x1)
        )
        values[~inside] = 0.0
    mask = values >= d.confidence_threshold
    labels, count = label_mask(mask.astype(np.uint8), connectivity=8)
    if count == 0:
        return []

    a_ref = reference_mask_area(d.sigma, d.confidence_threshold)
    out: list[Point2D] = []
    ys_all, xs_all = np.nonzero(labels)
    lab_all = labels[ys_all, xs_all]
    order = np.argsort(lab_all, kind="stable")
    ys_all, xs_all, lab_all = ys_all[order], xs_all[order], lab_all[order]
    bounds = np.searchsorted(lab_all, np.arange(1, count + 2))
    suppress_r = 2.0 * d.sigma
    for k in range(count):
        ys = ys_all[bounds[k] : bounds[k + 1]]
        xs = xs_all[bounds[k] : bounds[k + 1]]
        area = ys.size
        vals = values[ys, xs]
        if area <= d.split_area_factor * a_ref:
            total = vals.sum()
            out.append(Point2D(float(((xs + 0.5) * vals).sum() / total),
                               float(((ys + 0.5) * vals).sum() / total)))
            continue
        n_peaks = max(1, int(round(area / a_ref)))
        work = vals.copy()
        for _ in range(n_peaks):
            best = int(np.argmax(work))
            if work[best] <= 0.0:
                break
            px, py = xs[best] + 0.5, ys[best] + 0.5
            out.append(Point2D(float(px), float(py)))
            d2 = (xs + 0.5 - px) ** 2 + (ys + 0.5 - py) ** 2
            work[d2 <= suppress_r * suppress_r] = 0.0
    out.sort(key=lambda p: (p.y, p.x))
    return out


def heatmap_to_image(h: Heatmap) -> ImageBuffer:
    """Quantize to 8-bit gray (value = round(255*Y); max error 1/510)."""
    return ImageBuffer(np.round(h.values * 255.0).astype(np.uint8))


def heatmap_from_image(img: ImageBuffer) -> Heatmap:
    if img.channels != "gray8":
        raise ValueError("heatmap image form must be 8-bit gray")
    return Heatmap(img.array.astype(np.float64) / 255.0)
