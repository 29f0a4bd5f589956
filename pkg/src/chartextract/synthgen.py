"""Deterministic synthetic chart generator.

Renders PNG charts with exact ground truth: the annotation (axes, ticks,
legends), the rendered element geometry as a detection set, and the
source data series.  Rendering is integer-exact: solid fills, 1-px
strokes, no anti-aliasing, text via an embedded bitmap font, so the same
spec always produces the same bytes and every drawn pixel maps exactly
back to its source value.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import font
from .fileio import atomic_write_bytes
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
    serialize_annotation,
    serialize_detections,
    serialize_series_json,
)
from .raster.image import ImageBuffer, encode_image

N_TICKS = 5
BLACK = (0, 0, 0)
GRID_COLOR = (220, 220, 220)
DEFAULT_PALETTE = (
    (214, 39, 40),    # red
    (31, 119, 180),   # blue
    (44, 160, 44),    # green
    (255, 127, 14),   # orange
    (148, 103, 189),  # purple
)


@dataclass(frozen=True)
class GenStyle:
    gridlines: bool = True
    marker_size: int = 3
    bar_gap_ratio: float = 0.3
    axis_margin: int = 48
    # minimum center distance between markers; None disables the constraint
    min_marker_sep: float | None = 8.0
    # when set, scatter points come in pairs exactly this far apart, to
    # reproduce the fused-marker failure mode of CC baselines
    pair_spacing: float | None = None

    def __post_init__(self):
        if not 0.0 < self.bar_gap_ratio < 1.0:
            raise ValueError("bar_gap_ratio must be in (0,1)")
        if self.marker_size < 1:
            raise ValueError("marker_size must be >= 1")


@dataclass(frozen=True)
class GenSpec:
    seed: int
    chart_type: ChartType
    width: int = 640
    height: int = 480
    n_series: int = 1
    n_items: int = 8  # categories for bar/boxplot, points per series otherwise
    palette: tuple[tuple[int, int, int], ...] = DEFAULT_PALETTE
    style: GenStyle = field(default_factory=GenStyle)
    value_range: tuple[float, float] = (0.0, 100.0)
    scale: ScaleKind = ScaleKind.LINEAR

    def __post_init__(self):
        if not 1 <= self.n_series <= 5:
            raise ValueError("n_series must be in 1..5")
        if not 1 <= self.n_items <= 40:
            raise ValueError("n_items must be in 1..40")
        if self.n_series > len(self.palette):
            raise ValueError("palette smaller than n_series")
        lo, hi = self.value_range
        if not lo < hi:
            raise ValueError("value_range must satisfy lo < hi")
        if self.scale is ScaleKind.EXPONENTIAL and lo <= 0:
            raise ValueError("exponential scale requires positive values")


@dataclass(frozen=True)
class GenResult:
    image: ImageBuffer
    annotation: ChartAnnotation
    gt_detections: DetectionSet
    gt_series: tuple[DataSeries, ...]


class _AxisMap:
    """Exact pixel<->value map along one axis.

    Ticks sit at ``anchor + direction*i*step`` for i in 0..N_TICKS-1;
    values run from lo at the anchor to hi at the far tick, linearly or
    log-linearly.
    """

    def __init__(self, anchor: float, direction: int, step: int,
                 lo: float, hi: float, scale: ScaleKind):
        self.anchor = anchor
        self.direction = direction
        self.step = step
        self.lo = lo
        self.hi = hi
        self.scale = scale
        self.span = (N_TICKS - 1) * step

    def value_at(self, coord: float) -> float:
        u = (coord - self.anchor) * self.direction / self.span
        if self.scale is ScaleKind.LINEAR:
            return self.lo + u * (self.hi - self.lo)
        return 10.0 ** (math.log10(self.lo) + u * (math.log10(self.hi) - math.log10(self.lo)))

    def tick_positions(self) -> list[float]:
        return [self.anchor + self.direction * i * self.step for i in range(N_TICKS)]

    def tick_values(self) -> list[float]:
        return [self.value_at(p) for p in self.tick_positions()]

    @property
    def far(self) -> float:
        return self.anchor + self.direction * self.span


def _fmt_value(v: float) -> str:
    return f"{v:g}"


# -- drawing primitives -----------------------------------------------------


def _fill_rect(canvas: np.ndarray, x0: int, y0: int, x1: int, y1: int,
               color: tuple[int, int, int]) -> None:
    h, w = canvas.shape[:2]
    canvas[max(0, y0):min(h, y1), max(0, x0):min(w, x1)] = color


def _draw_disc(canvas: np.ndarray, cx: float, cy: float, r: int,
               color: tuple[int, int, int]) -> None:
    h, w = canvas.shape[:2]
    x0 = max(0, int(math.floor(cx - r)))
    x1 = min(w, int(math.ceil(cx + r)) + 1)
    y0 = max(0, int(math.floor(cy - r)))
    y1 = min(h, int(math.ceil(cy + r)) + 1)
    xs = np.arange(x0, x1) + 0.5 - cx
    ys = np.arange(y0, y1) + 0.5 - cy
    mask = ys[:, None] ** 2 + xs[None, :] ** 2 <= r * r
    canvas[y0:y1, x0:x1][mask] = color


def _draw_segment(canvas: np.ndarray, x0: int, y0: int, x1: int, y1: int,
                  color: tuple[int, int, int]) -> None:
    """1-px Bresenham line."""
    h, w = canvas.shape[:2]
    dx, dy = abs(x1 - x0), -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    x, y = x0, y0
    while True:
        if 0 <= x < w and 0 <= y < h:
            canvas[y, x] = color
        if x == x1 and y == y1:
            break
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x += sx
        if e2 <= dx:
            err += dx
            y += sy


# -- axis furniture -----------------------------------------------------------


def _draw_frame(canvas: np.ndarray, plot: BoundingBox) -> None:
    x0, y0, x1, y1 = int(plot.x0), int(plot.y0), int(plot.x1), int(plot.y1)
    canvas[y0 - 1:y1 + 1, x0 - 1] = BLACK  # y axis stroke, left of plot
    canvas[y1, x0 - 1:x1] = BLACK          # x axis stroke, below plot


def _draw_y_tick(canvas: np.ndarray, plot: BoundingBox, ty: float, label: str) -> None:
    row = int(round(ty)) if ty < plot.y1 else int(plot.y1)
    x0 = int(plot.x0)
    canvas[row, x0 - 4:x0 - 1] = BLACK
    font.draw_text(canvas, x0 - 7 - font.text_width(label), row - 3, label, BLACK)


def _draw_x_tick(canvas: np.ndarray, plot: BoundingBox, tx: float, label: str) -> None:
    col = int(round(tx)) if tx < plot.x1 else int(plot.x1) - 1
    y1 = int(plot.y1)
    canvas[y1 + 1:y1 + 4, col] = BLACK
    font.draw_text(canvas, col - font.text_width(label) // 2, y1 + 6, label, BLACK)


def _draw_gridlines(canvas: np.ndarray, plot: BoundingBox,
                    rows: list[float] = (), cols: list[float] = ()) -> None:
    x0, y0, x1, y1 = int(plot.x0), int(plot.y0), int(plot.x1), int(plot.y1)
    for ty in rows:
        row = int(round(ty))
        if y0 <= row < y1:
            canvas[row, x0:x1] = GRID_COLOR
    for tx in cols:
        col = int(round(tx))
        if x0 < col < x1:
            canvas[y0:y1, col] = GRID_COLOR


def _draw_legends(canvas: np.ndarray, plot: BoundingBox, labels: list[str],
                  palette) -> list[LegendEntry]:
    lx = int(plot.x1) + 14
    ly = int(plot.y0) + 6
    entries = []
    for j, label in enumerate(labels):
        sy = ly + j * 16
        _fill_rect(canvas, lx, sy, lx + 12, sy + 8, palette[j])
        font.draw_text(canvas, lx + 16, sy, label, BLACK)
        entries.append(LegendEntry(label, BoundingBox(lx, sy, lx + 12, sy + 8)))
    return entries


def _numeric_axis_at(orientation: Orientation, amap: _AxisMap, cross: float) -> Axis:
    """Numeric axis with the cross-coordinate filled in for tick pixels."""
    ticks = []
    for pos, val in zip(amap.tick_positions(), amap.tick_values()):
        if orientation is Orientation.HORIZONTAL:
            pixel = Point2D(pos, cross)
        else:
            pixel = Point2D(cross, pos)
        ticks.append(TickPoint(pixel, _fmt_value(val), val))
    ticks.sort(key=lambda t: t.pixel.x if orientation is Orientation.HORIZONTAL else t.pixel.y)
    return Axis(orientation, tuple(ticks), amap.scale)


def _categorical_axis(orientation: Orientation, positions: list[float],
                      labels: list[str], cross: float) -> Axis:
    ticks = []
    for pos, label in zip(positions, labels):
        if orientation is Orientation.HORIZONTAL:
            pixel = Point2D(pos, cross)
        else:
            pixel = Point2D(cross, pos)
        ticks.append(TickPoint(pixel, label, None))
    return Axis(orientation, tuple(ticks))


# -- layout -------------------------------------------------------------------


def _layout(spec: GenSpec) -> BoundingBox:
    left = spec.style.axis_margin
    bottom = spec.style.axis_margin
    top = 20
    right = 120 if spec.n_series >= 2 else 20
    plot = BoundingBox(left, top, spec.width - right, spec.height - bottom)
    if plot.width < 4 * N_TICKS or plot.height < 4 * N_TICKS:
        raise ValueError("canvas too small for the requested layout")
    return plot


def _vertical_value_map(spec: GenSpec, plot: BoundingBox) -> _AxisMap:
    step = int(plot.height - 1) // (N_TICKS - 1)
    return _AxisMap(float(int(plot.y1)), -1, step, *spec.value_range, spec.scale)


def _horizontal_value_map(spec: GenSpec, plot: BoundingBox) -> _AxisMap:
    step = int(plot.width - 1) // (N_TICKS - 1)
    return _AxisMap(float(int(plot.x0)), 1, step, *spec.value_range, spec.scale)


def _series_labels(spec: GenSpec) -> list[str]:
    # single-series charts carry no legend, so ground truth uses the same
    # fallback name the converter assigns to legendless elements
    if spec.n_series == 1:
        return ["series-0"]
    return [f"series-{j + 1}" for j in range(spec.n_series)]


# -- per-type builders --------------------------------------------------------


def _gen_bars(spec: GenSpec, rng: random.Random, canvas: np.ndarray, plot: BoundingBox):
    vertical = spec.chart_type is ChartType.BAR_VERTICAL
    vmap = _vertical_value_map(spec, plot) if vertical else _horizontal_value_map(spec, plot)
    n_cat, n_ser = spec.n_items, spec.n_series
    slot = (plot.width if vertical else plot.height) / n_cat
    inner = slot * (1.0 - spec.style.bar_gap_ratio)
    thickness = max(2, int((inner - (n_ser - 1)) / n_ser))
    group_extent = n_ser * thickness + (n_ser - 1)

    cat_labels = [f"c{i + 1}" for i in range(n_cat)]
    cat_positions = []
    boxes: list[tuple[BoundingBox, float]] = []
    records: list[list[CategoryRecord]] = [[] for _ in range(n_ser)]
    anchor = int(vmap.anchor)
    lo_extent = int(round(vmap.far))

    for i in range(n_cat):
        base = (plot.x0 if vertical else plot.y0) + i * slot
        cat_positions.append(base + slot / 2.0)
        g0 = int(round(base + (slot - group_extent) / 2.0))
        for j in range(n_ser):
            cross0 = g0 + j * (thickness + 1)
            if vertical:
                top = rng.randint(lo_extent, anchor - 3)
                _fill_rect(canvas, cross0, top, cross0 + thickness, anchor, spec.palette[j])
                bb = BoundingBox(cross0, top, cross0 + thickness, anchor)
                value = vmap.value_at(top)
            else:
                right = rng.randint(anchor + 3, lo_extent)
                _fill_rect(canvas, anchor, cross0, right, cross0 + thickness, spec.palette[j])
                bb = BoundingBox(anchor, cross0, right, cross0 + thickness)
                value = vmap.value_at(right)
            boxes.append((bb, 1.0))
            records[j].append(CategoryRecord(cat_labels[i], value))

    if vertical:
        x_axis = _categorical_axis(Orientation.HORIZONTAL, cat_positions, cat_labels, plot.y1)
        y_axis = _numeric_axis_at(Orientation.VERTICAL, vmap, plot.x0)
    else:
        x_axis = _numeric_axis_at(Orientation.HORIZONTAL, vmap, plot.y1)
        y_axis = _categorical_axis(Orientation.VERTICAL, cat_positions, cat_labels, plot.x0)

    series = [
        DataSeries(name, tuple(recs))
        for name, recs in zip(_series_labels(spec), records)
    ]
    det = DetectionSet("", "boxes", boxes=tuple(boxes))
    return x_axis, y_axis, det, series


def _sample_point_cells(spec: GenSpec, rng: random.Random, plot: BoundingBox,
                        xmap: _AxisMap, ymap: _AxisMap) -> list[list[tuple[int, int]]]:
    """Integer cell coordinates for scatter markers, all series together."""
    margin = spec.style.marker_size + 8
    x_lo = int(xmap.anchor) + margin
    x_hi = int(round(xmap.far)) - margin
    y_hi = int(ymap.anchor) - margin
    y_lo = int(round(ymap.far)) + margin
    if x_hi <= x_lo or y_hi <= y_lo:
        raise ValueError("plot too small for the marker margin")

    placed: list[tuple[int, int]] = []
    min_sep = spec.style.min_marker_sep

    def far_enough(c, sep):
        return all((c[0] - q[0]) ** 2 + (c[1] - q[1]) ** 2 >= sep * sep for q in placed)

    def sample_one(sep) -> tuple[int, int]:
        for _ in range(20000):
            c = (rng.randint(x_lo, x_hi), rng.randint(y_lo, y_hi))
            if sep is None or far_enough(c, sep):
                return c
        raise ValueError("could not place markers with the requested separation")

    out: list[list[tuple[int, int]]] = []
    pair = spec.style.pair_spacing
    for _ in range(spec.n_series):
        cells: list[tuple[int, int]] = []
        if pair is not None:
            dx = int(round(pair))
            n_pairs, rest = divmod(spec.n_items, 2)
            for _ in range(n_pairs):
                # anchors keep 2*pair distance so only intended pairs fuse
                a = sample_one(2.0 * pair + 2)
                b = (a[0] + dx, a[1])
                placed.extend([a, b])
                cells.extend([a, b])
            for _ in range(rest):
                a = sample_one(2.0 * pair + 2)
                placed.append(a)
                cells.append(a)
        else:
            for _ in range(spec.n_items):
                c = sample_one(min_sep)
                placed.append(c)
                cells.append(c)
        out.append(cells)
    return out


def _gen_points(spec: GenSpec, rng: random.Random, canvas: np.ndarray, plot: BoundingBox):
    is_line = spec.chart_type is ChartType.LINE
    xmap = _horizontal_value_map(spec, plot)
    # both axes numeric; reuse value_range for x with a linear scale
    xmap = _AxisMap(xmap.anchor, 1, xmap.step, *spec.value_range, ScaleKind.LINEAR)
    ymap = _vertical_value_map(spec, plot)
    r = spec.style.marker_size

    points: list[tuple[Point2D, float]] = []
    series: list[DataSeries] = []

    if is_line:
        margin = r + 8
        x_lo = int(xmap.anchor) + margin
        x_hi = int(round(xmap.far)) - margin
        y_hi = int(ymap.anchor) - margin
        y_lo = int(round(ymap.far)) + margin
        n = spec.n_items
        xs = [x_lo + round(k * (x_hi - x_lo) / max(1, n - 1)) for k in range(n)]
        prior_ys: list[list[int]] = []
        for j in range(spec.n_series):
            ys = []
            for k in range(n):
                for _ in range(20000):
                    y = rng.randint(y_lo, y_hi)
                    if all(abs(y - prev[k]) >= 9 for prev in prior_ys):
                        break
                else:
                    raise ValueError("could not separate line series vertically")
                ys.append(y)
            prior_ys.append(ys)
            for k in range(n - 1):
                _draw_segment(canvas, xs[k], ys[k], xs[k + 1], ys[k + 1], spec.palette[j])
            recs = []
            for k in range(n):
                px, py = xs[k] + 0.5, ys[k] + 0.5
                _draw_disc(canvas, px, py, r, spec.palette[j])
                points.append((Point2D(px, py), 1.0))
                recs.append(XYRecord(xmap.value_at(px), ymap.value_at(py)))
            series.append(DataSeries(_series_labels(spec)[j], tuple(recs)))
    else:
        cells = _sample_point_cells(spec, rng, plot, xmap, ymap)
        for j, series_cells in enumerate(cells):
            recs = []
            for ix, iy in series_cells:
                px, py = ix + 0.5, iy + 0.5
                _draw_disc(canvas, px, py, r, spec.palette[j])
                points.append((Point2D(px, py), 1.0))
                recs.append(XYRecord(xmap.value_at(px), ymap.value_at(py)))
            recs.sort(key=lambda rec: (rec.x, rec.y))
            series.append(DataSeries(_series_labels(spec)[j], tuple(recs)))

    x_axis = _numeric_axis_at(Orientation.HORIZONTAL, xmap, plot.y1)
    y_axis = _numeric_axis_at(Orientation.VERTICAL, ymap, plot.x0)
    det = DetectionSet("", "points", points=tuple(points))
    return x_axis, y_axis, det, series


def _lighten(color: tuple[int, int, int]) -> tuple[int, int, int]:
    return tuple(min(255, c + (255 - c) * 2 // 3) for c in color)


def _gen_boxplots(spec: GenSpec, rng: random.Random, canvas: np.ndarray, plot: BoundingBox):
    vertical = spec.chart_type is ChartType.BOXPLOT_VERTICAL
    vmap = _vertical_value_map(spec, plot) if vertical else _horizontal_value_map(spec, plot)
    n_cat = spec.n_items
    slot = (plot.width if vertical else plot.height) / n_cat
    box_extent = max(6, int(slot * 0.5))
    cap_extent = max(4, box_extent // 2)
    color = spec.palette[0]
    fill = _lighten(color)

    anchor = int(vmap.anchor)
    far = int(round(vmap.far))
    # coordinate range along the value axis, low pixel to high pixel
    v_lo, v_hi = (far, anchor) if vertical else (anchor, far)

    cat_labels = [f"c{i + 1}" for i in range(n_cat)]
    cat_positions = []
    boxes: list[tuple[BoundingBox, float]] = []
    records = []

    for i in range(n_cat):
        base = (plot.x0 if vertical else plot.y0) + i * slot
        center = base + slot / 2.0
        cat_positions.append(center)
        c0 = int(round(center - box_extent / 2.0))
        c1 = c0 + box_extent
        k0 = int(round(center - cap_extent / 2.0))
        k1 = k0 + cap_extent
        mid = int(round(center))

        while True:
            rows = sorted(rng.sample(range(v_lo + 2, v_hi - 2), 5))
            a, b, c, d, e = rows
            if d - b >= 3 and b < c < d - 1:
                break
        # a: far-whisker cap, b..d: box, c: median row, e: near-whisker cap
        if vertical:
            _fill_rect(canvas, c0, b, c1, d, fill)
            _fill_rect(canvas, c0, b, c1, b + 1, color)
            _fill_rect(canvas, c0, d - 1, c1, d, color)
            _fill_rect(canvas, c0, b, c0 + 1, d, color)
            _fill_rect(canvas, c1 - 1, b, c1, d, color)
            _fill_rect(canvas, c0, c, c1, c + 1, color)       # median
            _fill_rect(canvas, mid, a, mid + 1, b, color)     # upper whisker
            _fill_rect(canvas, mid, d, mid + 1, e + 1, color)  # lower whisker
            _fill_rect(canvas, k0, a, k1, a + 1, color)       # caps
            _fill_rect(canvas, k0, e, k1, e + 1, color)
            main = BoundingBox(c0, b, c1, d)
            median_box = BoundingBox(c0, c, c1, c + 1)
            hi_cap = BoundingBox(k0, a, k1, a + 1)
            lo_cap = BoundingBox(k0, e, k1, e + 1)
            q3, q1 = vmap.value_at(b), vmap.value_at(d)
            med = vmap.value_at(c + 0.5)
            vmax = vmap.value_at(a + 0.5)
            vmin = vmap.value_at(e + 0.5)
        else:
            _fill_rect(canvas, b, c0, d, c1, fill)
            _fill_rect(canvas, b, c0, b + 1, c1, color)
            _fill_rect(canvas, d - 1, c0, d, c1, color)
            _fill_rect(canvas, b, c0, d, c0 + 1, color)
            _fill_rect(canvas, b, c1 - 1, d, c1, color)
            _fill_rect(canvas, c, c0, c + 1, c1, color)
            _fill_rect(canvas, a, mid, b, mid + 1, color)
            _fill_rect(canvas, d, mid, e + 1, mid + 1, color)
            _fill_rect(canvas, a, k0, a + 1, k1, color)
            _fill_rect(canvas, e, k0, e + 1, k1, color)
            main = BoundingBox(b, c0, d, c1)
            median_box = BoundingBox(c, c0, c + 1, c1)
            hi_cap = BoundingBox(e, k0, e + 1, k1)
            lo_cap = BoundingBox(a, k0, a + 1, k1)
            q1, q3 = vmap.value_at(b), vmap.value_at(d)
            med = vmap.value_at(c + 0.5)
            vmin = vmap.value_at(a + 0.5)
            vmax = vmap.value_at(e + 0.5)
        for bb in (main, median_box, lo_cap, hi_cap):
            boxes.append((bb, 1.0))
        records.append(BoxplotRecord(vmin, q1, med, q3, vmax))

    if vertical:
        x_axis = _categorical_axis(Orientation.HORIZONTAL, cat_positions, cat_labels, plot.y1)
        y_axis = _numeric_axis_at(Orientation.VERTICAL, vmap, plot.x0)
    else:
        x_axis = _numeric_axis_at(Orientation.HORIZONTAL, vmap, plot.y1)
        y_axis = _categorical_axis(Orientation.VERTICAL, cat_positions, cat_labels, plot.x0)

    series = [DataSeries("series-0", tuple(records))]
    det = DetectionSet("", "boxes", boxes=tuple(boxes))
    return x_axis, y_axis, det, series


# -- entry points -------------------------------------------------------------


def generate(spec: GenSpec) -> GenResult:
    """Render one chart and its exact ground truth; deterministic in seed."""
    rng = random.Random(spec.seed)
    plot = _layout(spec)
    canvas = np.full((spec.height, spec.width, 3), 255, dtype=np.uint8)

    ct = spec.chart_type
    if ct in (ChartType.BAR_VERTICAL, ChartType.BAR_HORIZONTAL):
        build = _gen_bars
    elif ct in (ChartType.BOXPLOT_VERTICAL, ChartType.BOXPLOT_HORIZONTAL):
        build = _gen_boxplots
    else:
        build = _gen_points

    # gridline positions depend only on the layout, so they can go down
    # before the data marks are sampled
    if ct in (ChartType.BAR_VERTICAL, ChartType.SCATTER, ChartType.LINE, ChartType.BOXPLOT_VERTICAL):
        vmap = _vertical_value_map(spec, plot)
        grid_rows = [p for p in vmap.tick_positions() if p < plot.y1]
    else:
        grid_rows = []
    if ct in (ChartType.BAR_HORIZONTAL, ChartType.SCATTER, ChartType.LINE, ChartType.BOXPLOT_HORIZONTAL):
        hmap = _horizontal_value_map(spec, plot)
        grid_cols = [p for p in hmap.tick_positions() if p > plot.x0]
    else:
        grid_cols = []
    if spec.style.gridlines:
        _draw_gridlines(canvas, plot, grid_rows, grid_cols)

    x_axis, y_axis, det, series = build(spec, rng, canvas, plot)

    _draw_frame(canvas, plot)
    for t in y_axis.ticks:
        _draw_y_tick(canvas, plot, t.pixel.y, t.label)
    for t in x_axis.ticks:
        _draw_x_tick(canvas, plot, t.pixel.x, t.label)

    legends: tuple[LegendEntry, ...] = ()
    if spec.n_series >= 2:
        legends = tuple(_draw_legends(canvas, plot, _series_labels(spec), spec.palette))

    image = ImageBuffer(canvas)
    image_id = f"{ct.value}-{spec.seed}"
    annotation = ChartAnnotation(image_id, ct, plot, x_axis, y_axis, legends)
    det = replace(det, image_id=image_id)
    return GenResult(image, annotation, det, tuple(series))


def apportion(count: int, weights: dict[ChartType, float]) -> dict[ChartType, int]:
    """Largest-remainder apportionment of ``count`` across chart types."""
    total = sum(weights.values())
    if total <= 0:
        raise ValueError("weights must sum to a positive value")
    shares = {t: count * w / total for t, w in weights.items()}
    counts = {t: int(math.floor(s)) for t, s in shares.items()}
    remainder = count - sum(counts.values())
    order = sorted(weights, key=lambda t: (-(shares[t] - counts[t]), t.value))
    for t in order[:remainder]:
        counts[t] += 1
    return counts


def generate_corpus(
    base_seed: int,
    count: int,
    mix: dict[ChartType, float],
    out_dir: str | Path,
    spec_overrides: dict | None = None,
) -> dict:
    """Write a chart corpus (images, annotations, GT files) plus a manifest.

    ``spec_overrides`` pins GenSpec/GenStyle fields that would otherwise be
    randomized per chart (e.g. {"n_series": 1, "gridlines": False}).
    """
    out_dir = Path(out_dir)
    counts = apportion(count, mix)
    overrides = dict(spec_overrides or {})
    style_keys = {f for f in GenStyle.__dataclass_fields__}
    style_overrides = {k: overrides.pop(k) for k in list(overrides) if k in style_keys}

    charts = []
    index = 0
    for chart_type in ChartType:
        for k in range(counts.get(chart_type, 0)):
            seed = base_seed * 1_000_003 + index
            chart_id = f"{chart_type.value}-{k:04d}"
            pick = random.Random(seed ^ 0xC0FFEE)
            params: dict = {
                "seed": seed,
                "chart_type": chart_type,
                "value_range": (0.0, float(pick.choice([10, 50, 100, 500]))),
            }
            if chart_type in (ChartType.BAR_VERTICAL, ChartType.BAR_HORIZONTAL):
                params["n_series"] = pick.randint(1, 3)
                params["n_items"] = pick.randint(3, 7)
            elif chart_type in (ChartType.BOXPLOT_VERTICAL, ChartType.BOXPLOT_HORIZONTAL):
                params["n_series"] = 1
                params["n_items"] = pick.randint(2, 5)
            elif chart_type is ChartType.LINE:
                params["n_series"] = pick.randint(1, 3)
                params["n_items"] = pick.randint(4, 10)
            else:
                params["n_series"] = pick.randint(1, 3)
                params["n_items"] = pick.randint(5, 15)
            params.update(overrides)
            style = GenStyle(**style_overrides) if style_overrides else GenStyle()
            spec = GenSpec(style=style, **params)
            result = generate(spec)

            result = GenResult(
                result.image,
                replace(result.annotation, image_id=chart_id),
                replace(result.gt_detections, image_id=chart_id),
                result.gt_series,
            )
            paths = {
                "image": f"images/{chart_id}.png",
                "annotation": f"annotations/{chart_id}.json",
                "gt_detections": f"gt/{chart_id}.detections.json",
                "gt_series": f"gt/{chart_id}.series.json",
            }
            atomic_write_bytes(out_dir / paths["image"], encode_image(result.image))
            atomic_write_bytes(out_dir / paths["annotation"], serialize_annotation(result.annotation))
            atomic_write_bytes(out_dir / paths["gt_detections"], serialize_detections(result.gt_detections))
            atomic_write_bytes(out_dir / paths["gt_series"], serialize_series_json(result.gt_series))
            charts.append({"id": chart_id, "chart_type": chart_type.value, "seed": seed, **paths})
            index += 1

    manifest = {
        "base_seed": base_seed,
        "count": count,
        "per_type": {t.value: n for t, n in sorted(counts.items(), key=lambda kv: kv[0].value) if n},
        "charts": charts,
    }
    atomic_write_bytes(
        out_dir / "manifest.json",
        (json.dumps(manifest, indent=2) + "\n").encode("utf-8"),
    )
    return manifest
