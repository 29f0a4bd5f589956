"""Data conversion: legend matching and pixel-to-value interpolation.

Detected elements are assigned to legend series by nearest L2 feature
distance (color histograms, or externally computed embedding vectors),
then mapped to semantic values through the fitted axis scales.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AxisFitError, ParseError
from .model import (
    Axis,
    BoundingBox,
    BoxplotRecord,
    CategoryRecord,
    ChartAnnotation,
    ChartType,
    DataSeries,
    DetectionSet,
    Orientation,
    Point2D,
    ScaleKind,
    TickPoint,
    XYRecord,
)
from .raster.image import ImageBuffer

HIST_BINS = 16
EMBEDDING_DIM = 128
RESIDUAL_TOL = 1e-3
POINT_PATCH_HALF = 2  # (2*sigma+1)-square around a point, sigma=2


# ---------------------------------------------------------------------------
# Features and legend matching
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    kind: str  # rgb-hist | hsv-hist | concat | external-embedding

    def __post_init__(self):
        arr = np.ascontiguousarray(self.values, dtype=np.float64)
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)
        expected = {
            "rgb-hist": 3 * HIST_BINS,
            "hsv-hist": 3 * HIST_BINS,
            "concat": 6 * HIST_BINS,
            "external-embedding": EMBEDDING_DIM,
        }
        if self.kind not in expected:
            raise ValueError(f"unknown feature kind {self.kind!r}")
        if arr.shape != (expected[self.kind],):
            raise ValueError(
                f"{self.kind} feature must have length {expected[self.kind]}, got {arr.shape}"
            )


def _rgb_to_hsv(rgb: np.ndarray) -> np.ndarray:
    """Vectorized RGB [0,255] -> (H in [0,360), S in [0,1], V in [0,1])."""
    arr = rgb.astype(np.float64) / 255.0
    r, g, b = arr[:, 0], arr[:, 1], arr[:, 2]
    v = arr.max(axis=1)
    c = v - arr.min(axis=1)
    s = np.where(v > 0, c / np.where(v > 0, v, 1.0), 0.0)
    h = np.zeros_like(v)
    nz = c > 0
    rmax = nz & (v == r)
    gmax = nz & (v == g) & ~rmax
    bmax = nz & ~rmax & ~gmax
    h[rmax] = ((g - b)[rmax] / c[rmax]) % 6.0
    h[gmax] = (b - r)[gmax] / c[gmax] + 2.0
    h[bmax] = (r - g)[bmax] / c[bmax] + 4.0
    return np.stack([h * 60.0, s, v], axis=1)


def _channel_hist(values: np.ndarray, lo: float, hi: float) -> np.ndarray:
    bins = np.clip(((values - lo) / (hi - lo) * HIST_BINS).astype(np.int64), 0, HIST_BINS - 1)
    hist = np.bincount(bins, minlength=HIST_BINS).astype(np.float64)
    return hist / hist.sum()


def extract_feature(img: ImageBuffer, patch: BoundingBox, kind: str) -> FeatureVector:
    """L1-normalized per-channel color histogram over the patch pixels."""
    if kind not in ("rgb-hist", "hsv-hist", "concat"):
        raise ValueError(f"cannot compute feature of kind {kind!r}")
    if img.channels != "rgb8":
        raise ValueError("feature extraction requires an rgb8 image")
    x0 = max(0, int(math.floor(patch.x0)))
    y0 = max(0, int(math.floor(patch.y0)))
    x1 = min(img.width, int(math.ceil(patch.x1)))
    y1 = min(img.height, int(math.ceil(patch.y1)))
    if x1 <= x0 or y1 <= y0:
        raise ValueError("patch does not intersect the image")
    pixels = img.array[y0:y1, x0:x1].reshape(-1, 3)

    parts = []
    if kind in ("rgb-hist", "concat"):
        parts.extend(_channel_hist(pixels[:, c].astype(np.float64), 0.0, 256.0) for c in range(3))
    if kind in ("hsv-hist", "concat"):
        hsv = _rgb_to_hsv(pixels)
        parts.append(_channel_hist(hsv[:, 0], 0.0, 360.0))
        parts.append(_channel_hist(hsv[:, 1], 0.0, 1.0 + 1e-12))
        parts.append(_channel_hist(hsv[:, 2], 0.0, 1.0 + 1e-12))
    return FeatureVector(np.concatenate(parts), kind)


def load_embeddings(data: bytes | str) -> dict[str, FeatureVector]:
    """Parse embedding lines: ``patch-id<TAB>v1,v2,...,v128``."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    out: dict[str, FeatureVector] = {}
    for lineno, line in enumerate(data.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            patch_id, payload = line.split("\t", 1)
        except ValueError as exc:
            raise ParseError("expected 'id<TAB>values'", field=f"line {lineno}") from exc
        values = np.array([float(v) for v in payload.split(",")], dtype=np.float64)
        if values.shape != (EMBEDDING_DIM,):
            raise ParseError(
                f"embedding must have dimension {EMBEDDING_DIM}, got {values.size}",
                field=f"line {lineno}",
            )
        out[patch_id] = FeatureVector(values, "external-embedding")
    return out


def serialize_embeddings(embeddings: dict[str, FeatureVector]) -> bytes:
    lines = []
    for patch_id, fv in embeddings.items():
        lines.append(patch_id + "\t" + ",".join(repr(float(v)) for v in fv.values))
    return ("\n".join(lines) + "\n").encode("utf-8")


def match_legends(elements: list[FeatureVector], legends: list[FeatureVector]) -> list[int]:
    """Nearest legend by L2 distance; ties go to the lowest legend index."""
    if not legends:
        raise ValueError("legends must be non-empty")
    kinds = {f.kind for f in elements} | {f.kind for f in legends}
    if len(kinds) > 1:
        raise ValueError(f"mixed feature kinds: {sorted(kinds)}")
    lengths = {f.values.size for f in elements} | {f.values.size for f in legends}
    if len(lengths) > 1:
        raise ValueError("feature dimension mismatch")
    legend_matrix = np.stack([l.values for l in legends])
    out = []
    for e in elements:
        d2 = ((legend_matrix - e.values) ** 2).sum(axis=1)
        out.append(int(np.argmin(d2)))  # argmin returns the first (lowest) index on ties
    return out


# ---------------------------------------------------------------------------
# Axis scales
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AxisScale:
    """value = a*pixel + b (linear) or 10**(a*pixel + b) (exponential)."""

    kind: ScaleKind
    a: float
    b: float

    def __post_init__(self):
        if self.a == 0.0:
            raise ValueError("scale slope must be non-zero")


@dataclass(frozen=True)
class PiecewiseLinearScale:
    """Fallback for broken axes: linear interpolation between adjacent ticks,
    with end-segment extrapolation."""

    knots: tuple[tuple[float, float], ...]  # (pixel, value), pixel-sorted

    def __post_init__(self):
        if len(self.knots) < 2:
            raise ValueError("piecewise scale needs >= 2 knots")


def _tick_pixels_values(axis: Axis) -> tuple[np.ndarray, np.ndarray]:
    ticks = axis.numeric_ticks
    pixels = np.array([axis.tick_coordinate(t) for t in ticks], dtype=np.float64)
    values = np.array([t.value for t in ticks], dtype=np.float64)
    return pixels, values


def _max_rel_residual(pred: np.ndarray, values: np.ndarray) -> float:
    span = values.max() - values.min()
    denom = max(span, np.abs(values).max(), 1e-12)
    return float(np.abs(pred - values).max() / denom)


def fit_axis_scale(axis: Axis, tol: float = RESIDUAL_TOL) -> AxisScale:
    """Least-squares fit of a linear and a log10-linear model; keep whichever
    stays within ``tol`` maximum relative residual, preferring linear."""
    pixels, values = _tick_pixels_values(axis)
    if pixels.size < 2:
        raise AxisFitError("need at least 2 numeric ticks")
    if pixels.max() - pixels.min() <= 0:
        raise AxisFitError("zero pixel spread between ticks")

    a_lin, b_lin = np.polyfit(pixels, values, 1)
    lin_res = _max_rel_residual(a_lin * pixels + b_lin, values)

    exp_fit = None
    if np.all(values > 0):
        a_exp, b_exp = np.polyfit(pixels, np.log10(values), 1)
        if a_exp != 0.0:
            exp_res = _max_rel_residual(10.0 ** (a_exp * pixels + b_exp), values)
            exp_fit = (a_exp, b_exp, exp_res)

    if lin_res <= tol and a_lin != 0.0:
        return AxisScale(ScaleKind.LINEAR, float(a_lin), float(b_lin))
    if exp_fit is not None and exp_fit[2] <= tol:
        return AxisScale(ScaleKind.EXPONENTIAL, float(exp_fit[0]), float(exp_fit[1]))
    raise AxisFitError("no consistent scale")


def fit_scale_with_fallback(axis: Axis, tol: float = RESIDUAL_TOL):
    """fit_axis_scale, falling back to piecewise-linear between ticks."""
    try:
        return fit_axis_scale(axis, tol)
    except AxisFitError:
        pixels, values = _tick_pixels_values(axis)
        if pixels.size < 2 or pixels.max() - pixels.min() <= 0:
            raise
        order = np.argsort(pixels)
        return PiecewiseLinearScale(tuple(zip(pixels[order].tolist(), values[order].tolist())))


def pixel_to_value(scale: AxisScale | PiecewiseLinearScale, pixel: float) -> float:
    if isinstance(scale, AxisScale):
        affine = scale.a * pixel + scale.b
        return affine if scale.kind is ScaleKind.LINEAR else 10.0 ** affine
    knots = scale.knots
    if pixel <= knots[0][0]:
        lo, hi = knots[0], knots[1]
    elif pixel >= knots[-1][0]:
        lo, hi = knots[-2], knots[-1]
    else:
        idx = 1
        while knots[idx][0] < pixel:
            idx += 1
        lo, hi = knots[idx - 1], knots[idx]
    t = (pixel - lo[0]) / (hi[0] - lo[0])
    return lo[1] + t * (hi[1] - lo[1])


# ---------------------------------------------------------------------------
# Conversion pipeline
# ---------------------------------------------------------------------------


def _nearest_tick(ticks: tuple[TickPoint, ...], axis: Axis, coord: float) -> TickPoint:
    # ticks are pixel-sorted, so min() hits the lower coordinate on ties
    return min(ticks, key=lambda t: (abs(axis.tick_coordinate(t) - coord), axis.tick_coordinate(t)))


def _category_ticks(axis: Axis) -> tuple[TickPoint, ...]:
    cats = axis.categorical_ticks
    return cats if cats else axis.ticks


def _assign_legend_indices(
    img: ImageBuffer | None,
    annotation: ChartAnnotation,
    patches: list[BoundingBox],
    feature_kind: str,
    embeddings: dict[str, FeatureVector] | None,
) -> list[int]:
    """One legend index per element patch.

    For external embeddings, vectors are looked up by the ids
    ``element-<i>`` and ``legend-<j>`` (in patch / legend order).
    """
    if feature_kind == "external-embedding":
        if embeddings is None:
            raise ValueError("external-embedding features require an embeddings map")
        try:
            element_fvs = [embeddings[f"element-{i}"] for i in range(len(patches))]
            legend_fvs = [embeddings[f"legend-{j}"] for j in range(len(annotation.legends))]
        except KeyError as exc:
            raise ValueError(f"missing embedding for patch id {exc.args[0]!r}") from exc
    else:
        if img is None:
            raise ValueError("histogram features require the chart image")
        element_fvs = [extract_feature(img, bb, feature_kind) for bb in patches]
        legend_fvs = [extract_feature(img, e.patch_bb, feature_kind) for e in annotation.legends]
    return match_legends(element_fvs, legend_fvs)


def _point_patch(p: Point2D) -> BoundingBox:
    h = POINT_PATCH_HALF + 0.5
    return BoundingBox(p.x - h, p.y - h, p.x + h, p.y + h)


def _series_name(annotation: ChartAnnotation, legend_idx: int | None) -> str:
    if legend_idx is None:
        return "series-0"
    return annotation.legends[legend_idx].label


def _group_by_legend(n_elements: int, legend_indices: list[int] | None,
                     n_legends: int) -> list[tuple[int | None, list[int]]]:
    if legend_indices is None:
        return [(None, list(range(n_elements)))]
    groups: list[tuple[int | None, list[int]]] = []
    for j in range(n_legends):
        members = [i for i, li in enumerate(legend_indices) if li == j]
        groups.append((j, members))
    return groups


def _convert_bars(img, annotation, detections, feature_kind, embeddings) -> list[DataSeries]:
    vertical = annotation.chart_type is ChartType.BAR_VERTICAL
    value_axis = annotation.y_axis if vertical else annotation.x_axis
    cat_axis = annotation.x_axis if vertical else annotation.y_axis
    scale = fit_scale_with_fallback(value_axis)
    cats = _category_ticks(cat_axis)

    boxes = [bb for bb, _ in detections.boxes]
    legend_indices = None
    if annotation.legends:
        legend_indices = _assign_legend_indices(img, annotation, boxes, feature_kind, embeddings)

    series = []
    for legend_idx, members in _group_by_legend(len(boxes), legend_indices, len(annotation.legends)):
        records = []
        ordered = sorted(members, key=lambda i: boxes[i].center.x if vertical else boxes[i].center.y)
        for i in ordered:
            bb = boxes[i]
            if vertical:
                tick = _nearest_tick(cats, cat_axis, bb.center.x)
                value = pixel_to_value(scale, bb.y0)  # top edge
            else:
                tick = _nearest_tick(cats, cat_axis, bb.center.y)
                value = pixel_to_value(scale, bb.x1)  # right edge
            records.append(CategoryRecord(tick.label, value))
        series.append(DataSeries(_series_name(annotation, legend_idx), tuple(records)))
    return series


def _convert_boxplots(annotation, detections) -> list[DataSeries]:
    vertical = annotation.chart_type is ChartType.BOXPLOT_VERTICAL
    value_axis = annotation.y_axis if vertical else annotation.x_axis
    cat_axis = annotation.x_axis if vertical else annotation.y_axis
    scale = fit_scale_with_fallback(value_axis)
    cats = _category_ticks(cat_axis)

    slots: dict[float, list[BoundingBox]] = {}
    for bb, _ in detections.boxes:
        coord = bb.center.x if vertical else bb.center.y
        tick = _nearest_tick(cats, cat_axis, coord)
        slots.setdefault(cat_axis.tick_coordinate(tick), []).append(bb)

    def edge_values(bb: BoundingBox) -> tuple[float, float]:
        if vertical:
            lo, hi = pixel_to_value(scale, bb.y1), pixel_to_value(scale, bb.y0)
        else:
            lo, hi = pixel_to_value(scale, bb.x0), pixel_to_value(scale, bb.x1)
        return (min(lo, hi), max(lo, hi))

    records = []
    for coord in sorted(slots):
        group = slots[coord]
        thickness = (lambda b: b.height) if vertical else (lambda b: b.width)
        thin = [b for b in group if thickness(b) <= 2.0]
        fat = [b for b in group if thickness(b) > 2.0]
        main = max(fat, key=lambda b: b.area) if fat else max(group, key=lambda b: b.area)
        q1, q3 = edge_values(main)
        center_value = lambda b: pixel_to_value(scale, (b.y0 + b.y1) / 2 if vertical else (b.x0 + b.x1) / 2)
        median = (q1 + q3) / 2.0
        lo_whisker, hi_whisker = q1, q3
        for b in thin:
            v = center_value(b)
            if q1 <= v <= q3:
                median = v
            elif v > q3:
                hi_whisker = max(hi_whisker, v)
            else:
                lo_whisker = min(lo_whisker, v)
        median = min(max(median, q1), q3)
        records.append(BoxplotRecord(lo_whisker, q1, median, q3, hi_whisker))
    return [DataSeries("series-0", tuple(records))]


def _convert_points(img, annotation, detections, feature_kind, embeddings) -> list[DataSeries]:
    x_scale = fit_scale_with_fallback(annotation.x_axis)
    y_scale = fit_scale_with_fallback(annotation.y_axis)
    points = [pt for pt, _ in detections.points]

    legend_indices = None
    if annotation.legends:
        patches = [_point_patch(pt) for pt in points]
        legend_indices = _assign_legend_indices(img, annotation, patches, feature_kind, embeddings)

    series = []
    for legend_idx, members in _group_by_legend(len(points), legend_indices, len(annotation.legends)):
        pairs = [
            XYRecord(pixel_to_value(x_scale, points[i].x), pixel_to_value(y_scale, points[i].y))
            for i in members
        ]
        pairs.sort(key=lambda r: (r.x, r.y))
        series.append(DataSeries(_series_name(annotation, legend_idx), tuple(pairs)))
    return series


def convert(
    img: ImageBuffer | None,
    annotation: ChartAnnotation,
    detections: DetectionSet,
    feature_kind: str = "concat",
    embeddings: dict[str, FeatureVector] | None = None,
) -> list[DataSeries]:
    """Turn detections into named, valued data series."""
    ct = annotation.chart_type
    if ct.uses_boxes and detections.kind != "boxes":
        raise ValueError(f"{ct.value} charts need box detections, got {detections.kind}")
    if ct.uses_points and detections.kind != "points":
        raise ValueError(f"{ct.value} charts need point detections, got {detections.kind}")

    if ct in (ChartType.BAR_VERTICAL, ChartType.BAR_HORIZONTAL):
        return _convert_bars(img, annotation, detections, feature_kind, embeddings)
    if ct in (ChartType.BOXPLOT_VERTICAL, ChartType.BOXPLOT_HORIZONTAL):
        return _convert_boxplots(annotation, detections)
    return _convert_points(img, annotation, detections, feature_kind, embeddings)
