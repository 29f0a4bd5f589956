"""Domain model: invariants, parsing, serialization round-trips."""

import json
import math

import pytest
from hypothesis import given, strategies as st

from chartextract.errors import ParseError
from chartextract.model import (
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
    TickPoint,
    XYRecord,
    parse_annotation,
    parse_detections,
    parse_series_json,
    parse_tick_value,
    serialize_annotation,
    serialize_detections,
    serialize_series_csv,
    serialize_series_json,
)


def make_annotation(**overrides) -> ChartAnnotation:
    fields = dict(
        image_id="img-1",
        chart_type=ChartType.BAR_VERTICAL,
        plot_bb=BoundingBox(10, 10, 200, 150),
        x_axis=Axis(
            Orientation.HORIZONTAL,
            (TickPoint(Point2D(30, 150), "c1"), TickPoint(Point2D(90, 150), "c2")),
        ),
        y_axis=Axis(
            Orientation.VERTICAL,
            (TickPoint(Point2D(10, 50), "10", 10.0), TickPoint(Point2D(10, 100), "0", 0.0)),
        ),
        legends=(),
    )
    fields.update(overrides)
    return ChartAnnotation(**fields)


class TestChartType:
    def test_from_string(self):
        assert ChartType.from_string("bar-vertical") is ChartType.BAR_VERTICAL
        assert ChartType.from_string("scatter") is ChartType.SCATTER

    def test_unknown_type_rejected(self):
        with pytest.raises(ValueError):
            ChartType.from_string("pie")

    def test_kind_partition(self):
        for ct in ChartType:
            assert ct.uses_boxes != ct.uses_points


class TestBoundingBox:
    def test_inverted_rejected(self):
        with pytest.raises(ValueError):
            BoundingBox(0, 0, -1, 10)
        with pytest.raises(ValueError):
            BoundingBox(0, 5, 10, 4)

    def test_zero_extent_allowed(self):
        assert BoundingBox(5, 0, 5, 10).width == 0

    def test_geometry(self):
        bb = BoundingBox(0, 0, 10, 5)
        assert bb.area == 50
        assert bb.center == Point2D(5, 2.5)
        assert bb.diagonal == pytest.approx(math.hypot(10, 5))

    def test_intersection(self):
        a = BoundingBox(0, 0, 10, 10)
        assert a.intersection(BoundingBox(5, 5, 15, 15)) == BoundingBox(5, 5, 10, 10)
        assert a.intersection(BoundingBox(20, 20, 30, 30)) is None

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            BoundingBox(0, 0, math.inf, 1)


class TestTickParsing:
    @pytest.mark.parametrize(
        "label,expected",
        [
            ("10", 10.0),
            ("1e3", 1000.0),
            ("-2.5", -2.5),
            ("$1,200", 1200.0),
            ("45%", 45.0),
            ("c1", None),
            ("", None),
        ],
    )
    def test_parse_tick_value(self, label, expected):
        assert parse_tick_value(label) == expected

    def test_axis_monotone_required(self):
        with pytest.raises(ValueError, match="monotone"):
            Axis(
                Orientation.VERTICAL,
                (TickPoint(Point2D(0, 50), "a"), TickPoint(Point2D(0, 50), "b")),
            )

    def test_numeric_categorical_split(self):
        axis = Axis(
            Orientation.HORIZONTAL,
            (TickPoint(Point2D(0, 0), "c1"), TickPoint(Point2D(10, 0), "5", 5.0)),
        )
        assert len(axis.numeric_ticks) == 1
        assert len(axis.categorical_ticks) == 1


class TestAnnotationRoundTrip:
    def test_round_trip(self):
        ann = make_annotation(
            legends=(LegendEntry("series-1", BoundingBox(210, 20, 222, 28)),)
        )
        assert parse_annotation(serialize_annotation(ann)) == ann

    def test_minimal_two_tick_axis(self):
        doc = {
            "image_id": "m",
            "chart_type": "bar-vertical",
            "plot_bb": {"x0": 0, "y0": 0, "x1": 300, "y1": 300},
            "x_axis": {"orientation": "horizontal",
                       "ticks": [{"x": 50, "y": 290, "label": "c1"}]},
            "y_axis": {"orientation": "vertical",
                       "ticks": [{"x": 0, "y": 100, "label": "10"},
                                 {"x": 0, "y": 200, "label": "0"}]},
            "legends": [],
        }
        ann = parse_annotation(json.dumps(doc))
        assert [t.value for t in ann.y_axis.ticks] == [10.0, 0.0]

    def test_scientific_label_parsed(self):
        ann = make_annotation()
        doc = json.loads(serialize_annotation(ann))
        doc["y_axis"]["ticks"][0]["label"] = "1e3"
        del doc["y_axis"]["ticks"][0]["value"]
        parsed = parse_annotation(json.dumps(doc))
        assert parsed.y_axis.ticks[0].value == 1000.0

    def test_duplicate_tick_pixels_error(self):
        ann = make_annotation()
        doc = json.loads(serialize_annotation(ann))
        doc["y_axis"]["ticks"][1]["y"] = doc["y_axis"]["ticks"][0]["y"]
        with pytest.raises(ParseError, match="monotone"):
            parse_annotation(json.dumps(doc))

    def test_empty_legends_explicit(self):
        doc = json.loads(serialize_annotation(make_annotation()))
        assert doc["legends"] == []

    def test_malformed_document(self):
        with pytest.raises(ParseError):
            parse_annotation(b"{not json")
        with pytest.raises(ParseError, match="plot_bb"):
            parse_annotation(json.dumps({"image_id": "x", "chart_type": "scatter"}))


class TestDetections:
    def test_exactly_one_payload(self):
        with pytest.raises(ValueError):
            DetectionSet("i", "boxes", boxes=(), points=((Point2D(1, 1), 0.5),))
        with pytest.raises(ValueError):
            DetectionSet("i", "points", boxes=((BoundingBox(0, 0, 1, 1), 0.5),))

    def test_score_range(self):
        with pytest.raises(ValueError, match="score"):
            DetectionSet("i", "points", points=((Point2D(1, 1), 1.2),))

    def test_three_box_file(self):
        items = [{"box": {"x0": i, "y0": 0, "x1": i + 1, "y1": 2}, "score": 0.5}
                 for i in range(3)]
        d = parse_detections(json.dumps({"image_id": "i", "kind": "boxes", "items": items}))
        assert len(d.boxes) == 3

    def test_kind_payload_mismatch(self):
        doc = {"image_id": "i", "kind": "boxes",
               "items": [{"point": {"x": 1, "y": 2}, "score": 0.5}]}
        with pytest.raises(ParseError):
            parse_detections(json.dumps(doc))

    @given(
        st.sampled_from(["boxes", "points"]),
        st.lists(st.tuples(st.integers(0, 100), st.integers(0, 100),
                           st.floats(0, 1)), max_size=8),
    )
    def test_round_trip_property(self, kind, raw):
        if kind == "boxes":
            items = tuple(
                (BoundingBox(x, y, x + 1 + (x % 3), y + 2), round(s, 6)) for x, y, s in raw
            )
            d = DetectionSet("img", "boxes", boxes=items)
        else:
            items = tuple((Point2D(x + 0.5, y + 0.5), round(s, 6)) for x, y, s in raw)
            d = DetectionSet("img", "points", points=items)
        assert parse_detections(serialize_detections(d)) == d


class TestSeries:
    def test_boxplot_ordering_enforced(self):
        with pytest.raises(ValueError):
            BoxplotRecord(min=5, q1=1, median=2, q3=3, max=4)

    def test_mixed_record_kinds_rejected(self):
        with pytest.raises(ValueError):
            DataSeries("s", (XYRecord(1, 2), CategoryRecord("a", 3)))

    def test_csv_xy(self):
        series = [DataSeries("a", (XYRecord(1, 2), XYRecord(3, 4)))]
        text = serialize_series_csv(series).decode()
        lines = text.strip().split("\n")
        assert lines[0] == "name,x,y"
        assert len(lines) == 3

    def test_csv_boxplot_columns(self):
        series = [DataSeries("b", (BoxplotRecord(1, 2, 3, 4, 5),))]
        header = serialize_series_csv(series).decode().split("\n")[0]
        assert header == "name,min,q1,median,q3,max"

    def test_csv_mixed_series_kinds_rejected(self):
        series = [DataSeries("a", (XYRecord(1, 2),)),
                  DataSeries("b", (CategoryRecord("c", 3),))]
        with pytest.raises(ValueError):
            serialize_series_csv(series)

    def test_json_round_trip(self):
        series = [
            DataSeries("a", (XYRecord(0.1, 2.30000001), XYRecord(1e-7, 4))),
            DataSeries("b", (XYRecord(5, 6),)),
        ]
        back = parse_series_json(serialize_series_json(series))
        assert len(back) == 2
        for s, t in zip(series, back):
            assert s.name == t.name
            for r, q in zip(s.records, t.records):
                assert q.x == pytest.approx(r.x, rel=1e-9)
                assert q.y == pytest.approx(r.y, rel=1e-9)

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            XYRecord(float("nan"), 1.0)
