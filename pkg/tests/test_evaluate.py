"""Scoring functions against brute-force assignment oracles."""

import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chartextract import evaluate as ev
from chartextract.model import (
    BoundingBox,
    BoxplotRecord,
    CategoryRecord,
    DataSeries,
    Point2D,
    XYRecord,
)


def random_boxes(rng, n, span=100):
    out = []
    for _ in range(n):
        x0 = float(rng.uniform(0, span - 2))
        y0 = float(rng.uniform(0, span - 2))
        out.append(BoundingBox(x0, y0, x0 + float(rng.uniform(1, 20)), y0 + float(rng.uniform(1, 20))))
    return out


class TestIou:
    def test_identical(self):
        b = BoundingBox(3, 4, 10, 12)
        assert ev.iou(b, b) == 1.0

    def test_half_overlap(self):
        assert ev.iou(BoundingBox(0, 0, 10, 10), BoundingBox(0, 0, 10, 5)) == 0.5

    def test_disjoint(self):
        assert ev.iou(BoundingBox(0, 0, 1, 1), BoundingBox(5, 5, 6, 6)) == 0.0


class TestFMeasure:
    def test_perfect(self):
        gt = random_boxes(np.random.default_rng(0), 5)
        for t in (0.5, 0.7, 0.9):
            assert ev.f_measure_at_iou(gt, gt, t) == 100.0

    def test_empty_cases(self):
        assert ev.f_measure_at_iou([], [], 0.5) == 100.0
        assert ev.f_measure_at_iou([], [BoundingBox(0, 0, 1, 1)], 0.5) == 0.0
        assert ev.f_measure_at_iou([BoundingBox(0, 0, 1, 1)], [], 0.5) == 0.0

    def test_threshold_cut(self):
        gt = [BoundingBox(0, 0, 10, 10)]
        pred = [BoundingBox(0, 0, 10, 8)]  # IoU 0.8
        assert ev.f_measure_at_iou(pred, gt, 0.7) == 100.0
        assert ev.f_measure_at_iou(pred, gt, 0.9) == 0.0

    @given(st.integers(0, 2 ** 63 - 1))
    @settings(max_examples=60, deadline=None)
    def test_monotone_in_threshold(self, seed):
        rng = np.random.default_rng(seed)
        pred = random_boxes(rng, int(rng.integers(1, 8)))
        gt = random_boxes(rng, int(rng.integers(1, 8)))
        values = [ev.f_measure_at_iou(pred, gt, t) for t in (0.3, 0.5, 0.7, 0.9)]
        assert all(a >= b - 1e-12 for a, b in zip(values, values[1:]))


class TestScoreBoxes:
    def test_perfect(self):
        gt = random_boxes(np.random.default_rng(1), 4)
        assert ev.score_boxes(gt, gt) == pytest.approx(100.0)

    def test_denominator_rule(self):
        gt = [BoundingBox(0, 0, 10, 10), BoundingBox(50, 50, 60, 60)]
        pred = [BoundingBox(0, 0, 10, 10)]
        assert ev.score_boxes(pred, gt) == pytest.approx(50.0)

    def test_empty(self):
        assert ev.score_boxes([], []) == 100.0
        assert ev.score_boxes([], random_boxes(np.random.default_rng(2), 3)) == 0.0


def brute_force_point_score(pred, gt, tau):
    n, m = len(pred), len(gt)
    k = min(n, m)
    best = 0.0
    idx_p, idx_g = list(range(n)), list(range(m))
    for subset in itertools.permutations(idx_p, k):
        gains = 0.0
        for i, j in zip(subset, idx_g[:k]):
            gains += 1.0 - min(1.0, pred[i].distance_to(gt[j]) / tau)
        best = max(best, gains)
    # permuting which gt indices participate matters when m > n
    for subset in itertools.permutations(idx_g, k):
        gains = 0.0
        for i, j in zip(idx_p[:k], subset):
            gains += 1.0 - min(1.0, pred[i].distance_to(gt[j]) / tau)
        best = max(best, gains)
    return 100.0 * best / max(n, m)


class TestScorePoints:
    PLOT = BoundingBox(0, 0, 60, 80)  # diagonal 100, tau = 5

    def test_perfect(self):
        pts = [Point2D(3, 4), Point2D(10, 20)]
        assert ev.score_points(pts, pts, self.PLOT) == pytest.approx(100.0)

    def test_at_cap_distance(self):
        gt = [Point2D(10, 10)]
        pred = [Point2D(15, 10)]  # distance 5 == tau
        assert ev.score_points(pred, gt, self.PLOT) == pytest.approx(0.0)

    def test_half_cap(self):
        gt = [Point2D(10, 10)]
        pred = [Point2D(12.5, 10)]
        assert ev.score_points(pred, gt, self.PLOT) == pytest.approx(50.0)

    @given(st.integers(0, 2 ** 63 - 1))
    @settings(max_examples=60, deadline=None)
    def test_matches_permutation_brute_force(self, seed):
        rng = np.random.default_rng(seed)
        n, m = int(rng.integers(1, 7)), int(rng.integers(1, 7))
        pred = [Point2D(float(rng.uniform(0, 60)), float(rng.uniform(0, 80))) for _ in range(n)]
        gt = [Point2D(float(rng.uniform(0, 60)), float(rng.uniform(0, 80))) for _ in range(m)]
        got = ev.score_points(pred, gt, self.PLOT)
        want = brute_force_point_score(pred, gt, 0.05 * self.PLOT.diagonal)
        assert got == pytest.approx(want, abs=1e-9)

    @given(st.integers(0, 2 ** 63 - 1))
    @settings(max_examples=40, deadline=None)
    def test_symmetric(self, seed):
        rng = np.random.default_rng(seed)
        a = [Point2D(float(rng.uniform(0, 60)), float(rng.uniform(0, 80)))
             for _ in range(int(rng.integers(1, 6)))]
        b = [Point2D(float(rng.uniform(0, 60)), float(rng.uniform(0, 80)))
             for _ in range(int(rng.integers(1, 6)))]
        assert ev.score_points(a, b, self.PLOT) == pytest.approx(
            ev.score_points(b, a, self.PLOT))


class TestNameSimilarity:
    @pytest.mark.parametrize("a,b,d", [("abc", "abc", 0), ("abc", "abd", 1),
                                       ("", "xyz", 3), ("kitten", "sitting", 3)])
    def test_levenshtein(self, a, b, d):
        assert ev.levenshtein(a, b) == d

    def test_similarity_normalized(self):
        assert ev.name_similarity("abcd", "abcd") == 1.0
        assert ev.name_similarity("abcd", "abce") == 0.75
        assert ev.name_similarity("", "") == 1.0


def cat_series(name, pairs):
    return DataSeries(name, tuple(CategoryRecord(c, v) for c, v in pairs))


class TestScoreSeries:
    def test_exact_match(self):
        gt = [cat_series("a", [("c1", 5.0), ("c2", 7.0)])]
        out = ev.score_series(gt, gt)
        assert out == {"s1": 100.0, "s2": 100.0, "s3": 100.0}

    def test_ten_percent_off(self):
        gt = [cat_series("a", [("c1", 10.0)])]
        pred = [cat_series("a", [("c1", 11.0)])]
        out = ev.score_series(pred, gt)
        assert out["s1"] == pytest.approx(100.0)
        assert out["s2"] == pytest.approx(90.0)
        assert out["s3"] == pytest.approx(95.0)

    def test_missing_category_scores_zero(self):
        gt = [cat_series("a", [("c1", 10.0), ("c2", 10.0)])]
        pred = [cat_series("a", [("c1", 10.0)])]
        assert ev.score_series(pred, gt)["s2"] == pytest.approx(50.0)

    def test_unmatched_series_penalized(self):
        gt = [cat_series("a", [("c1", 1.0)]), cat_series("b", [("c1", 1.0)])]
        pred = [cat_series("a", [("c1", 1.0)])]
        out = ev.score_series(pred, gt)
        assert out["s1"] == pytest.approx(50.0)
        assert out["s2"] == pytest.approx(50.0)

    def test_boxplot_five_numbers(self):
        gt = [DataSeries("s", (BoxplotRecord(0, 10, 20, 30, 40),))]
        pred = [DataSeries("s", (BoxplotRecord(0, 10, 22, 30, 40),))]
        out = ev.score_series(pred, gt)
        assert out["s2"] == pytest.approx(100.0 * (4 + 0.9) / 5)

    def test_continuous_exact(self):
        gt = [DataSeries("s", (XYRecord(0, 1), XYRecord(1, 2), XYRecord(2, 3)))]
        assert ev.score_series(gt, gt)["s2"] == pytest.approx(100.0)

    def test_continuous_x_tolerance(self):
        gt = [DataSeries("s", (XYRecord(0, 10), XYRecord(100, 10)))]
        pred = [DataSeries("s", (XYRecord(0, 10), XYRecord(110, 10)))]
        # second pred x is 10% of range away from the nearest gt x: no pairing
        out = ev.score_series(pred, gt)
        assert out["s2"] == pytest.approx(50.0)

    def test_permutation_invariance(self):
        gt = [cat_series("a", [("c1", 1.0)]), cat_series("b", [("c1", 2.0)])]
        pred = [cat_series("b", [("c1", 2.0)]), cat_series("a", [("c1", 1.5)])]
        assert ev.score_series(pred, gt) == ev.score_series(list(reversed(pred)), gt)

    @given(st.integers(0, 2 ** 63 - 1))
    @settings(max_examples=40, deadline=None)
    def test_pairing_matches_brute_force(self, seed):
        rng = np.random.default_rng(seed)
        names = ["alpha", "beta", "gamma", "delta"]
        n, m = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        pred = [cat_series(names[i], [("c", float(rng.uniform(1, 9)))]) for i in range(n)]
        gt = [cat_series(rng.choice(names), [("c", float(rng.uniform(1, 9)))]) for _ in range(m)]
        got = ev.score_series(pred, gt)["s1"]
        k = min(n, m)
        best = 0.0
        for perm in itertools.permutations(range(m), k):
            best = max(best, sum(ev.name_similarity(pred[i].name, gt[j].name)
                                 for i, j in zip(range(k), perm)))
        for perm in itertools.permutations(range(n), k):
            best = max(best, sum(ev.name_similarity(pred[i].name, gt[j].name)
                                 for i, j in zip(perm, range(k))))
        assert got == pytest.approx(100.0 * best / max(n, m), abs=1e-9)

    def test_weight_validated(self):
        with pytest.raises(ValueError):
            ev.score_series([], [], weight=1.5)


class TestSelfConsistency:
    @given(st.integers(0, 2 ** 63 - 1))
    @settings(max_examples=50, deadline=None)
    def test_identity_scores_100(self, seed):
        rng = np.random.default_rng(seed)
        boxes = random_boxes(rng, int(rng.integers(1, 6)))
        pts = [Point2D(float(rng.uniform(0, 50)), float(rng.uniform(0, 50)))
               for _ in range(int(rng.integers(1, 6)))]
        plot = BoundingBox(0, 0, 60, 80)
        assert ev.score_boxes(boxes, boxes) == pytest.approx(100.0)
        assert ev.score_points(pts, pts, plot) == pytest.approx(100.0)
        for t in (0.5, 0.7, 0.9):
            assert ev.f_measure_at_iou(boxes, boxes, t) == 100.0

    @given(st.integers(0, 2 ** 63 - 1))
    @settings(max_examples=30, deadline=None)
    def test_empty_vs_nonempty_scores_0(self, seed):
        rng = np.random.default_rng(seed)
        boxes = random_boxes(rng, int(rng.integers(1, 5)))
        assert ev.score_boxes([], boxes) == 0.0
        assert ev.f_measure_at_iou([], boxes, 0.5) == 0.0


class TestEvalReport:
    def test_add_validates(self):
        r = ev.EvalReport()
        with pytest.raises(ValueError):
            r.add("x", {"bogus": 1.0})
        with pytest.raises(ValueError):
            r.add("x", {"s1": 120.0})

    def test_aggregate_means_defined_fields(self):
        r = ev.EvalReport()
        r.add("a", {"s1": 100.0, "score_a": 80.0})
        r.add("b", {"s1": 50.0})
        agg = r.aggregate
        assert agg["s1"] == pytest.approx(75.0)
        assert agg["score_a"] == pytest.approx(80.0)
        assert "s2" not in agg

    def test_json_sorted(self):
        r = ev.EvalReport()
        r.add("b", {"s1": 1.0})
        r.add("a", {"s1": 2.0})
        obj = r.to_json_obj()
        assert list(obj["per_image"]) == ["a", "b"]
        assert obj["version"] == "ce-metrics-v1"
        json.dumps(obj)  # serializable

    def test_text_table_header(self):
        r = ev.EvalReport()
        r.add("img", {"s1": 12.345})
        text = r.to_text_table()
        assert text.startswith("# metrics: ce-metrics-v1\n")
        assert "12.35" in text
        assert text.endswith("\n")
