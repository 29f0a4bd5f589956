"""Canonical domain types and the annotation/detection/series file formats.

All pixel coordinates use the raster convention: origin at the top-left
corner, x grows to the right, y grows downward.  Every type validates its
invariants at construction time, so an invalid value cannot exist once a
constructor has returned.  All types are immutable and safe to share
between threads.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

from .errors import ParseError


class ChartType(Enum):
    BAR_VERTICAL = "bar-vertical"
    BAR_HORIZONTAL = "bar-horizontal"
    BOXPLOT_VERTICAL = "boxplot-vertical"
    BOXPLOT_HORIZONTAL = "boxplot-horizontal"
    SCATTER = "scatter"
    LINE = "line"

    @classmethod
    def from_string(cls, s: str) -> "ChartType":
        for member in cls:
            if member.value == s:
                return member
        raise ValueError(f"unknown chart type {s!r}")

    @property
    def uses_boxes(self) -> bool:
        return self in (
            ChartType.BAR_VERTICAL,
            ChartType.BAR_HORIZONTAL,
            ChartType.BOXPLOT_VERTICAL,
            ChartType.BOXPLOT_HORIZONTAL,
        )

    @property
    def uses_points(self) -> bool:
        return not self.uses_boxes


class Orientation(Enum):
    HORIZONTAL = "horizontal"
    VERTICAL = "vertical"


class ScaleKind(Enum):
    LINEAR = "linear"
    EXPONENTIAL = "exponential"


def _require_finite(name: str, *values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned pixel rectangle, (x0, y0) top-left, (x1, y1) bottom-right."""

    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self):
        _require_finite("bounding box coordinate", self.x0, self.y0, self.x1, self.y1)
        if self.x0 > self.x1 or self.y0 > self.y1:
            raise ValueError(f"degenerate box: ({self.x0},{self.y0},{self.x1},{self.y1})")

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.y1 - self.y0

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def center(self) -> "Point2D":
        return Point2D((self.x0 + self.x1) / 2.0, (self.y0 + self.y1) / 2.0)

    @property
    def diagonal(self) -> float:
        return math.hypot(self.width, self.height)

    def contains_point(self, x: float, y: float) -> bool:
        return self.x0 <= x <= self.x1 and self.y0 <= y <= self.y1

    def contains_box(self, other: "BoundingBox") -> bool:
        return (
            self.x0 <= other.x0
            and self.y0 <= other.y0
            and other.x1 <= self.x1
            and other.y1 <= self.y1
        )

    def intersection(self, other: "BoundingBox") -> "BoundingBox | None":
        x0 = max(self.x0, other.x0)
        y0 = max(self.y0, other.y0)
        x1 = min(self.x1, other.x1)
        y1 = min(self.y1, other.y1)
        if x0 > x1 or y0 > y1:
            return None
        return BoundingBox(x0, y0, x1, y1)


@dataclass(frozen=True)
class Point2D:
    x: float
    y: float

    def __post_init__(self):
        _require_finite("point coordinate", self.x, self.y)

    def distance_to(self, other: "Point2D") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


# Numeric tick labels may carry a leading currency/percent marker and
# thousands separators; anything that still fails to parse is categorical.
_NUMERIC_PREFIX = re.compile(r"^[\s$€£¥%]+")


def parse_tick_value(label: str) -> float | None:
    """Parse a numeric value out of a tick label, or None if categorical."""
    text = _NUMERIC_PREFIX.sub("", label.strip())
    text = text.replace(",", "").rstrip("%").strip()
    if not text:
        return None
    try:
        value = float(text)
    except ValueError:
        return None
    return value if math.isfinite(value) else None


@dataclass(frozen=True)
class TickPoint:
    pixel: Point2D
    label: str
    value: float | None = None

    def __post_init__(self):
        if not self.label:
            raise ValueError("tick label must be non-empty")
        if self.value is not None:
            _require_finite("tick value", self.value)


@dataclass(frozen=True)
class Axis:
    orientation: Orientation
    ticks: tuple[TickPoint, ...]
    scale: ScaleKind | None = None

    def __post_init__(self):
        object.__setattr__(self, "ticks", tuple(self.ticks))
        coords = [self.tick_coordinate(t) for t in self.ticks]
        for a, b in zip(coords, coords[1:]):
            if not a < b:
                raise ValueError("ticks not strictly monotone in the axis coordinate")

    def tick_coordinate(self, tick: TickPoint) -> float:
        return tick.pixel.x if self.orientation is Orientation.HORIZONTAL else tick.pixel.y

    @property
    def numeric_ticks(self) -> tuple[TickPoint, ...]:
        return tuple(t for t in self.ticks if t.value is not None)

    @property
    def categorical_ticks(self) -> tuple[TickPoint, ...]:
        return tuple(t for t in self.ticks if t.value is None)


@dataclass(frozen=True)
class LegendEntry:
    label: str
    patch_bb: BoundingBox

    def __post_init__(self):
        if self.patch_bb.area <= 0:
            raise ValueError("legend patch must have positive area")


@dataclass(frozen=True)
class ChartAnnotation:
    image_id: str
    chart_type: ChartType
    plot_bb: BoundingBox
    x_axis: Axis
    y_axis: Axis
    legends: tuple[LegendEntry, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "legends", tuple(self.legends))
        if self.x_axis.orientation is self.y_axis.orientation:
            raise ValueError("x and y axes must have distinct orientations")


@dataclass(frozen=True)
class DetectionSet:
    """Scored detector output for one image: either boxes or points."""

    image_id: str
    kind: str  # "boxes" | "points"
    boxes: tuple[tuple[BoundingBox, float], ...] | None = None
    points: tuple[tuple[Point2D, float], ...] | None = None

    def __post_init__(self):
        if self.kind not in ("boxes", "points"):
            raise ValueError(f"unknown detection kind {self.kind!r}")
        if self.kind == "boxes":
            if self.boxes is None or self.points is not None:
                raise ValueError("kind=boxes requires boxes payload only")
            object.__setattr__(self, "boxes", tuple((b, float(s)) for b, s in self.boxes))
            scores = [s for _, s in self.boxes]
        else:
            if self.points is None or self.boxes is not None:
                raise ValueError("kind=points requires points payload only")
            object.__setattr__(self, "points", tuple((p, float(s)) for p, s in self.points))
            scores = [s for _, s in self.points]
        for s in scores:
            if not (0.0 <= s <= 1.0):
                raise ValueError(f"score out of range: {s}")

    def __len__(self) -> int:
        return len(self.boxes if self.kind == "boxes" else self.points)


@dataclass(frozen=True)
class XYRecord:
    x: float
    y: float

    def __post_init__(self):
        _require_finite("record value", self.x, self.y)


@dataclass(frozen=True)
class CategoryRecord:
    category: str
    value: float

    def __post_init__(self):
        _require_finite("record value", self.value)


@dataclass(frozen=True)
class BoxplotRecord:
    min: float
    q1: float
    median: float
    q3: float
    max: float

    def __post_init__(self):
        _require_finite("record value", self.min, self.q1, self.median, self.q3, self.max)
        if not (self.min <= self.q1 <= self.median <= self.q3 <= self.max):
            raise ValueError("boxplot five-number summary out of order")


SeriesRecord = XYRecord | CategoryRecord | BoxplotRecord


@dataclass(frozen=True)
class DataSeries:
    name: str
    records: tuple[SeriesRecord, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        kinds = {type(r) for r in self.records}
        if len(kinds) > 1:
            raise ValueError("mixed record kinds in one series")

    @property
    def record_kind(self) -> type | None:
        return type(self.records[0]) if self.records else None


# ---------------------------------------------------------------------------
# JSON annotation format
# ---------------------------------------------------------------------------


def _get(obj: dict, key: str, where: str):
    if key not in obj:
        raise ParseError("missing required key", field=f"{where}.{key}" if where else key)
    return obj[key]


def _bbox_from_json(obj, where: str) -> BoundingBox:
    if not isinstance(obj, dict):
        raise ParseError("expected object", field=where)
    try:
        return BoundingBox(
            float(_get(obj, "x0", where)),
            float(_get(obj, "y0", where)),
            float(_get(obj, "x1", where)),
            float(_get(obj, "y1", where)),
        )
    except (TypeError, ValueError) as exc:
        raise ParseError(str(exc), field=where) from exc


def _bbox_to_json(bb: BoundingBox) -> dict:
    return {"x0": bb.x0, "y0": bb.y0, "x1": bb.x1, "y1": bb.y1}


def _axis_from_json(obj, where: str) -> Axis:
    if not isinstance(obj, dict):
        raise ParseError("expected object", field=where)
    orientation = _get(obj, "orientation", where)
    try:
        orient = Orientation(orientation)
    except ValueError as exc:
        raise ParseError(f"unknown orientation {orientation!r}", field=f"{where}.orientation") from exc
    scale = None
    if obj.get("scale") is not None:
        try:
            scale = ScaleKind(obj["scale"])
        except ValueError as exc:
            raise ParseError(f"unknown scale {obj['scale']!r}", field=f"{where}.scale") from exc
    ticks = []
    raw_ticks = _get(obj, "ticks", where)
    for i, t in enumerate(raw_ticks):
        tw = f"{where}.ticks[{i}]"
        label = str(_get(t, "label", tw))
        value = t.get("value")
        if value is None:
            value = parse_tick_value(label)
        try:
            ticks.append(
                TickPoint(
                    Point2D(float(_get(t, "x", tw)), float(_get(t, "y", tw))),
                    label,
                    None if value is None else float(value),
                )
            )
        except (TypeError, ValueError) as exc:
            raise ParseError(str(exc), field=tw) from exc
    try:
        return Axis(orient, tuple(ticks), scale)
    except ValueError as exc:
        raise ParseError(str(exc), field=f"{where}.ticks") from exc


def _axis_to_json(axis: Axis) -> dict:
    out: dict = {
        "orientation": axis.orientation.value,
        "ticks": [
            {
                "x": t.pixel.x,
                "y": t.pixel.y,
                "label": t.label,
                **({"value": t.value} if t.value is not None else {}),
            }
            for t in axis.ticks
        ],
    }
    if axis.scale is not None:
        out["scale"] = axis.scale.value
    return out


def parse_annotation(data: bytes | str) -> ChartAnnotation:
    """Parse the UTF-8 JSON annotation document."""
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    image_id = str(_get(doc, "image_id", ""))
    raw_type = _get(doc, "chart_type", "")
    try:
        chart_type = ChartType.from_string(raw_type)
    except ValueError as exc:
        raise ParseError(str(exc), field="chart_type") from exc
    plot_bb = _bbox_from_json(_get(doc, "plot_bb", ""), "plot_bb")
    x_axis = _axis_from_json(_get(doc, "x_axis", ""), "x_axis")
    y_axis = _axis_from_json(_get(doc, "y_axis", ""), "y_axis")
    legends = []
    for i, entry in enumerate(_get(doc, "legends", "")):
        where = f"legends[{i}]"
        try:
            legends.append(
                LegendEntry(str(_get(entry, "label", where)), _bbox_from_json(_get(entry, "patch_bb", where), f"{where}.patch_bb"))
            )
        except ValueError as exc:
            raise ParseError(str(exc), field=where) from exc
    try:
        return ChartAnnotation(image_id, chart_type, plot_bb, x_axis, y_axis, tuple(legends))
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def serialize_annotation(a: ChartAnnotation) -> bytes:
    doc = {
        "image_id": a.image_id,
        "chart_type": a.chart_type.value,
        "plot_bb": _bbox_to_json(a.plot_bb),
        "x_axis": _axis_to_json(a.x_axis),
        "y_axis": _axis_to_json(a.y_axis),
        "legends": [
            {"label": e.label, "patch_bb": _bbox_to_json(e.patch_bb)} for e in a.legends
        ],
    }
    return _dump_json(doc)


def _dump_json(doc) -> bytes:
    # json refuses NaN/inf with allow_nan=False; construction should already
    # have rejected them, this is the serializer-side guard.
    try:
        text = json.dumps(doc, indent=2, allow_nan=False)
    except ValueError as exc:
        raise ParseError(f"non-finite value in document: {exc}") from exc
    return (text + "\n").encode("utf-8")


# ---------------------------------------------------------------------------
# JSON detection format
# ---------------------------------------------------------------------------


def parse_detections(data: bytes | str) -> DetectionSet:
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc}") from exc
    image_id = str(_get(doc, "image_id", ""))
    kind = _get(doc, "kind", "")
    items = _get(doc, "items", "")
    boxes: list[tuple[BoundingBox, float]] = []
    points: list[tuple[Point2D, float]] = []
    for i, item in enumerate(items):
        where = f"items[{i}]"
        score = float(_get(item, "score", where))
        has_box = "box" in item and item["box"] is not None
        has_point = "point" in item and item["point"] is not None
        if has_box == has_point:
            raise ParseError("item must carry exactly one of box/point", field=where)
        if has_box:
            boxes.append((_bbox_from_json(item["box"], f"{where}.box"), score))
        else:
            p = item["point"]
            try:
                points.append((Point2D(float(_get(p, "x", where)), float(_get(p, "y", where))), score))
            except ValueError as exc:
                raise ParseError(str(exc), field=f"{where}.point") from exc
    if kind == "boxes" and points:
        raise ParseError("kind=boxes but point items present", field="kind")
    if kind == "points" and boxes:
        raise ParseError("kind=points but box items present", field="kind")
    try:
        if kind == "boxes":
            return DetectionSet(image_id, "boxes", boxes=tuple(boxes))
        if kind == "points":
            return DetectionSet(image_id, "points", points=tuple(points))
    except ValueError as exc:
        raise ParseError(str(exc)) from exc
    raise ParseError(f"unknown detection kind {kind!r}", field="kind")


def serialize_detections(d: DetectionSet) -> bytes:
    items = []
    if d.kind == "boxes":
        for bb, score in d.boxes:
            items.append({"box": _bbox_to_json(bb), "score": score})
    else:
        for p, score in d.points:
            items.append({"point": {"x": p.x, "y": p.y}, "score": score})
    return _dump_json({"image_id": d.image_id, "kind": d.kind, "items": items})


# ---------------------------------------------------------------------------
# Data series tables (CSV and JSON forms)
# ---------------------------------------------------------------------------

_RECORD_COLUMNS: dict[type, tuple[str, ...]] = {
    XYRecord: ("x", "y"),
    CategoryRecord: ("category", "value"),
    BoxplotRecord: ("min", "q1", "median", "q3", "max"),
}


def _fmt_number(v: float) -> str:
    # repr() is the shortest decimal that round-trips, always >= 9
    # significant digits when they matter.
    return repr(float(v))


def _table_kind(series: Sequence[DataSeries]) -> type:
    kinds = {s.record_kind for s in series if s.record_kind is not None}
    if len(kinds) > 1:
        raise ValueError("all series in one table must share a record kind")
    return next(iter(kinds)) if kinds else XYRecord


def serialize_series_csv(series: Sequence[DataSeries]) -> bytes:
    """Delimited-text table: comma separator, '.' decimal, LF line ends."""
    kind = _table_kind(series)
    columns = _RECORD_COLUMNS[kind]
    lines = ["name," + ",".join(columns)]
    for s in series:
        for r in s.records:
            cells = [s.name]
            for col in columns:
                v = getattr(r, col)
                cells.append(v if isinstance(v, str) else _fmt_number(v))
            lines.append(",".join(cells))
    return ("\n".join(lines) + "\n").encode("utf-8")


def serialize_series_json(series: Sequence[DataSeries]) -> bytes:
    _table_kind(series)  # reject mixed tables early
    out = []
    for s in series:
        recs = []
        for r in s.records:
            columns = _RECORD_COLUMNS[type(r)]
            recs.append({col: getattr(r, col) for col in columns})
        out.append({"name": s.name, "records": recs})
    return _dump_json({"series": out})


def parse_series_json(data: bytes | str) -> list[DataSeries]:
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc}") from exc
    result = []
    for i, s in enumerate(_get(doc, "series", "")):
        where = f"series[{i}]"
        name = str(_get(s, "name", where))
        records: list[SeriesRecord] = []
        for j, r in enumerate(_get(s, "records", where)):
            rw = f"{where}.records[{j}]"
            keys = set(r)
            try:
                if keys == {"x", "y"}:
                    records.append(XYRecord(float(r["x"]), float(r["y"])))
                elif keys == {"category", "value"}:
                    records.append(CategoryRecord(str(r["category"]), float(r["value"])))
                elif keys == {"min", "q1", "median", "q3", "max"}:
                    records.append(
                        BoxplotRecord(
                            float(r["min"]), float(r["q1"]), float(r["median"]),
                            float(r["q3"]), float(r["max"]),
                        )
                    )
                else:
                    raise ParseError(f"unrecognized record shape {sorted(keys)}", field=rw)
            except ValueError as exc:
                raise ParseError(str(exc), field=rw) from exc
        try:
            result.append(DataSeries(name, tuple(records)))
        except ValueError as exc:
            raise ParseError(str(exc), field=where) from exc
    return result
