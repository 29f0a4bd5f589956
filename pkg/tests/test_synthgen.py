"""Synthetic generator: determinism, exact ground truth, corpus plumbing."""

import numpy as np
import pytest

from chartextract import convert as cv
from chartextract import evaluate as ev
from chartextract import heatmap as hm
from chartextract import synthgen
from chartextract.model import ChartType
from chartextract.raster.image import encode_image

ALL_TYPES = list(ChartType)


def gen(seed, chart_type, **kwargs):
    style_keys = set(synthgen.GenStyle.__dataclass_fields__)
    style_kwargs = {k: kwargs.pop(k) for k in list(kwargs) if k in style_keys}
    spec = synthgen.GenSpec(seed=seed, chart_type=chart_type,
                            style=synthgen.GenStyle(**style_kwargs), **kwargs)
    return synthgen.generate(spec)


class TestDeterminism:
    @pytest.mark.parametrize("chart_type", ALL_TYPES)
    def test_same_seed_byte_identical(self, chart_type):
        a = gen(11, chart_type)
        b = gen(11, chart_type)
        assert encode_image(a.image) == encode_image(b.image)
        assert a.annotation == b.annotation
        assert a.gt_detections == b.gt_detections
        assert a.gt_series == b.gt_series

    def test_different_seeds_differ(self):
        a = gen(1, ChartType.BAR_VERTICAL)
        b = gen(2, ChartType.BAR_VERTICAL)
        assert encode_image(a.image) != encode_image(b.image)


class TestGroundTruth:
    @pytest.mark.parametrize("chart_type", ALL_TYPES)
    def test_detections_inside_plot(self, chart_type):
        r = gen(21, chart_type, n_items=6)
        plot = r.annotation.plot_bb
        if r.gt_detections.kind == "boxes":
            for bb, _ in r.gt_detections.boxes:
                assert plot.contains_box(bb)
        else:
            for p, _ in r.gt_detections.points:
                assert plot.contains_point(p.x, p.y)

    @pytest.mark.parametrize("chart_type", ALL_TYPES)
    def test_self_score_is_100(self, chart_type):
        r = gen(33, chart_type)
        if r.gt_detections.kind == "boxes":
            boxes = [b for b, _ in r.gt_detections.boxes]
            assert ev.score_boxes(boxes, boxes) == pytest.approx(100.0)
            for t in (0.5, 0.7, 0.9):
                assert ev.f_measure_at_iou(boxes, boxes, t) == 100.0
        else:
            pts = [p for p, _ in r.gt_detections.points]
            assert ev.score_points(pts, pts, r.annotation.plot_bb) == pytest.approx(100.0)
        scores = ev.score_series(list(r.gt_series), list(r.gt_series))
        assert scores["s3"] == pytest.approx(100.0)

    def test_bar_pixels_single_color(self):
        r = gen(8, ChartType.BAR_VERTICAL, n_series=2, gridlines=False)
        arr = r.image.array
        for bb, _ in r.gt_detections.boxes:
            region = arr[int(bb.y0):int(bb.y1), int(bb.x0):int(bb.x1)]
            assert (region == region[0, 0]).all()

    @pytest.mark.parametrize("chart_type", ALL_TYPES)
    def test_oracle_conversion_recovers_source(self, chart_type):
        r = gen(55, chart_type, gridlines=False)
        series = cv.convert(r.image, r.annotation, r.gt_detections, "concat", None)
        scores = ev.score_series(series, list(r.gt_series))
        assert scores["s2"] >= 99.0
        assert scores["s1"] == pytest.approx(100.0)

    def test_scatter_heatmap_round_trip(self):
        r = gen(13, ChartType.SCATTER, n_items=12, n_series=1,
                gridlines=False, min_marker_sep=8.0)
        pts = [p for p, _ in r.gt_detections.points]
        decoded = hm.decode(
            hm.encode(pts, r.image.width, r.image.height),
            hm.DecodeParams(plot_bb=r.annotation.plot_bb),
        )
        assert len(decoded) == len(pts)
        for p in pts:
            assert min(d.distance_to(p) for d in decoded) <= 1.0

    def test_exponential_scale_charts(self):
        r = gen(3, ChartType.SCATTER, value_range=(1.0, 1000.0),
                scale=synthgen.ScaleKind.EXPONENTIAL, gridlines=False)
        scale = cv.fit_axis_scale(r.annotation.y_axis)
        assert scale.kind is synthgen.ScaleKind.EXPONENTIAL


class TestSpecValidation:
    def test_exponential_needs_positive_lo(self):
        with pytest.raises(ValueError):
            synthgen.GenSpec(seed=1, chart_type=ChartType.SCATTER,
                             value_range=(0.0, 10.0), scale=synthgen.ScaleKind.EXPONENTIAL)

    def test_series_bounds(self):
        with pytest.raises(ValueError):
            synthgen.GenSpec(seed=1, chart_type=ChartType.BAR_VERTICAL, n_series=6)


class TestApportion:
    def test_single_type(self):
        counts = synthgen.apportion(10, {ChartType.BAR_VERTICAL: 1.0})
        assert counts == {ChartType.BAR_VERTICAL: 10}

    def test_weights_respected_within_one(self):
        weights = {ChartType.BAR_VERTICAL: 3.0, ChartType.SCATTER: 2.0, ChartType.LINE: 1.0}
        counts = synthgen.apportion(100, weights)
        assert sum(counts.values()) == 100
        total_w = sum(weights.values())
        for t, w in weights.items():
            assert abs(counts[t] - 100 * w / total_w) < 1.0

    @pytest.mark.parametrize("count", [0, 1, 7, 99])
    def test_largest_remainder_oracle(self, count):
        weights = {ChartType.BAR_VERTICAL: 1.0, ChartType.SCATTER: 1.0, ChartType.LINE: 1.0}
        counts = synthgen.apportion(count, weights)
        assert sum(counts.values()) == count
        assert max(counts.values()) - min(counts.values()) <= 1

    def test_zero_weights_rejected(self):
        with pytest.raises(ValueError):
            synthgen.apportion(5, {ChartType.LINE: 0.0})


class TestCorpus:
    def test_corpus_regeneration_identical(self, tmp_path):
        mix = {ChartType.BAR_VERTICAL: 1.0, ChartType.SCATTER: 1.0}
        m1 = synthgen.generate_corpus(42, 4, mix, tmp_path / "a")
        m2 = synthgen.generate_corpus(42, 4, mix, tmp_path / "b")
        assert m1["charts"] == m2["charts"]
        for chart in m1["charts"]:
            for key in ("image", "annotation", "gt_detections", "gt_series"):
                assert (tmp_path / "a" / chart[key]).read_bytes() == \
                       (tmp_path / "b" / chart[key]).read_bytes()

    def test_manifest_counts(self, tmp_path):
        mix = {ChartType.BAR_VERTICAL: 1.0}
        m = synthgen.generate_corpus(1, 10, mix, tmp_path / "c")
        assert m["per_type"] == {"bar-vertical": 10}
        assert len(m["charts"]) == 10
        for chart in m["charts"]:
            assert (tmp_path / "c" / chart["image"]).is_file()


class TestFusedPairMode:
    def test_pairs_fuse_in_render_but_not_in_heatmap(self):
        r = gen(17, ChartType.SCATTER, n_series=1, n_items=4,
                gridlines=False, pair_spacing=6.0)
        pts = [p for p, _ in r.gt_detections.points]
        assert len(pts) == 4  # n_items counts points; they come in close pairs
        by_y = {}
        for p in pts:
            by_y.setdefault(p.y, []).append(p.x)
        for xs in by_y.values():
            xs.sort()
            assert len(xs) == 2 and xs[1] - xs[0] == pytest.approx(6.0)
        from chartextract import detect as det
        cc = det.detect_points(r.image, det.PointDetectParams(plot_bb=r.annotation.plot_bb))
        assert len(cc.points) < len(pts)
        decoded = hm.decode(
            hm.encode(pts, r.image.width, r.image.height),
            hm.DecodeParams(plot_bb=r.annotation.plot_bb),
        )
        assert len(decoded) == len(pts)
