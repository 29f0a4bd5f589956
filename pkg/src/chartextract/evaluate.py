"""Competition-style scoring (metrics version "ce-metrics-v1").

Element-detection scores: F-measure at fixed IoU thresholds, an IoU-mass
box score, and a distance-capped point score.  Data-series scores: name
similarity (s1), value accuracy (s2), and their weighted combination (s3).
All scores live in [0, 100].
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from scipy.optimize import linear_sum_assignment

import numpy as np

from .model import (
    BoundingBox,
    BoxplotRecord,
    CategoryRecord,
    DataSeries,
    Point2D,
    XYRecord,
)

METRICS_VERSION = "ce-metrics-v1"
HUNGARIAN_MAX_N = 512
EPS = 1e-9

logger = logging.getLogger(__name__)


def iou(a: BoundingBox, b: BoundingBox) -> float:
    inter = a.intersection(b)
    inter_area = inter.area if inter is not None else 0.0
    union = a.area + b.area - inter_area
    return inter_area / union if union > 0 else 0.0


def _greedy_matches(pred: list[BoundingBox], gt: list[BoundingBox]) -> list[tuple[int, int, float]]:
    """One-to-one matching in descending IoU order."""
    candidates = []
    for i, p in enumerate(pred):
        for j, g in enumerate(gt):
            v = iou(p, g)
            if v > 0.0:
                candidates.append((v, i, j))
    candidates.sort(key=lambda c: (-c[0], c[1], c[2]))
    used_p: set[int] = set()
    used_g: set[int] = set()
    matches = []
    for v, i, j in candidates:
        if i in used_p or j in used_g:
            continue
        used_p.add(i)
        used_g.add(j)
        matches.append((i, j, v))
    return matches


def f_measure_at_iou(pred: list[BoundingBox], gt: list[BoundingBox], t: float) -> float:
    if not pred and not gt:
        return 100.0
    if not pred or not gt:
        return 0.0
    tp = sum(1 for _, _, v in _greedy_matches(pred, gt) if v >= t)
    precision = tp / len(pred)
    recall = tp / len(gt)
    if precision + recall == 0:
        return 0.0
    return 200.0 * precision * recall / (precision + recall)


def score_boxes(pred: list[BoundingBox], gt: list[BoundingBox]) -> float:
    """IoU-mass score: 100 * sum of matched IoU / max(|pred|, |gt|)."""
    if not pred and not gt:
        return 100.0
    if not pred or not gt:
        return 0.0
    total = sum(v for _, _, v in _greedy_matches(pred, gt))
    return 100.0 * total / max(len(pred), len(gt))


def _assign_min_cost(cost: np.ndarray) -> list[tuple[int, int]]:
    n, m = cost.shape
    if max(n, m) <= HUNGARIAN_MAX_N:
        rows, cols = linear_sum_assignment(cost)
        return list(zip(rows.tolist(), cols.tolist()))
    logger.warning("assignment size %dx%d exceeds %d; using greedy matching", n, m, HUNGARIAN_MAX_N)
    order = np.argsort(cost, axis=None, kind="stable")
    used_r: set[int] = set()
    used_c: set[int] = set()
    out = []
    for flat in order:
        r, c = divmod(int(flat), m)
        if r in used_r or c in used_c:
            continue
        used_r.add(r)
        used_c.add(c)
        out.append((r, c))
        if len(out) == min(n, m):
            break
    return out


def score_points(pred: list[Point2D], gt: list[Point2D], plot_bb: BoundingBox) -> float:
    """Distance-capped assignment score; the cap is 5% of the plot diagonal."""
    if not pred and not gt:
        return 100.0
    if not pred or not gt:
        return 0.0
    tau = 0.05 * plot_bb.diagonal
    if tau <= 0:
        raise ValueError("degenerate plot area")
    cost = np.array(
        [[min(1.0, p.distance_to(g) / tau) for g in gt] for p in pred], dtype=np.float64
    )
    gain = sum(1.0 - cost[i, j] for i, j in _assign_min_cost(cost))
    return 100.0 * gain / max(len(pred), len(gt))


# ---------------------------------------------------------------------------
# Data-series scores
# ---------------------------------------------------------------------------


def levenshtein(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + (ca != cb)))
        previous = current
    return previous[-1]


def name_similarity(a: str, b: str) -> float:
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein(a, b) / longest


def _capped_value_score(pred: float, gt: float) -> float:
    return max(0.0, 1.0 - abs(pred - gt) / max(abs(gt), EPS))


def _score_categorical(pred: DataSeries, gt: DataSeries) -> float:
    pred_by_cat: dict[str, float] = {}
    for r in pred.records:
        pred_by_cat.setdefault(r.category, r.value)
    scores = []
    for r in gt.records:
        if r.category in pred_by_cat:
            scores.append(_capped_value_score(pred_by_cat[r.category], r.value))
        else:
            scores.append(0.0)
    return float(np.mean(scores)) if scores else (1.0 if not pred.records else 0.0)


def _score_continuous(pred: DataSeries, gt: DataSeries) -> float:
    gx = np.array([r.x for r in gt.records])
    gy = np.array([r.y for r in gt.records])
    px = np.array([r.x for r in pred.records])
    py = np.array([r.y for r in pred.records])
    if gx.size == 0 and px.size == 0:
        return 1.0
    if gx.size == 0 or px.size == 0:
        return 0.0
    x_tol = 0.02 * max(float(gx.max() - gx.min()), EPS)

    def directional(src_x, src_y, ref_x, ref_y):
        # for each reference point: nearest source point by x, value score
        # against the ground-truth y of that pairing
        scores = []
        for rx, ry in zip(ref_x, ref_y):
            k = int(np.argmin(np.abs(src_x - rx)))
            if abs(src_x[k] - rx) <= x_tol:
                scores.append(_capped_value_score(src_y[k], ry))
            else:
                scores.append(0.0)
        return float(np.mean(scores))

    gt_side = directional(px, py, gx, gy)
    # pred side: pair each prediction with the nearest ground-truth x and
    # keep gt as the relative-error reference
    scores = []
    for x, y in zip(px, py):
        k = int(np.argmin(np.abs(gx - x)))
        if abs(gx[k] - x) <= x_tol:
            scores.append(_capped_value_score(y, gy[k]))
        else:
            scores.append(0.0)
    pred_side = float(np.mean(scores))
    return (gt_side + pred_side) / 2.0


def _score_boxplot(pred: DataSeries, gt: DataSeries) -> float:
    slots = max(len(pred.records), len(gt.records))
    if slots == 0:
        return 1.0
    total = 0.0
    for p, g in zip(pred.records, gt.records):
        fives = [
            _capped_value_score(getattr(p, k), getattr(g, k))
            for k in ("min", "q1", "median", "q3", "max")
        ]
        total += float(np.mean(fives))
    return total / slots


def _series_value_score(pred: DataSeries, gt: DataSeries) -> float:
    pk, gk = pred.record_kind, gt.record_kind
    if pk is not None and gk is not None and pk is not gk:
        return 0.0
    kind = gk or pk
    if kind is CategoryRecord:
        return _score_categorical(pred, gt)
    if kind is BoxplotRecord:
        return _score_boxplot(pred, gt)
    if kind is XYRecord:
        return _score_continuous(pred, gt)
    return 1.0  # both empty


def score_series(pred: list[DataSeries], gt: list[DataSeries], weight: float = 0.5) -> dict[str, float]:
    """Returns {"s1", "s2", "s3"}; series are paired by an assignment that
    maximizes total name similarity, unmatched slots score zero."""
    if not 0.0 <= weight <= 1.0:
        raise ValueError("weight must be in [0,1]")
    n, m = len(pred), len(gt)
    if n == 0 and m == 0:
        return {"s1": 100.0, "s2": 100.0, "s3": 100.0}
    if n == 0 or m == 0:
        return {"s1": 0.0, "s2": 0.0, "s3": 0.0}
    sim = np.array([[name_similarity(p.name, g.name) for g in gt] for p in pred])
    pairs = _assign_min_cost(-sim)
    slots = max(n, m)
    s1 = 100.0 * sum(sim[i, j] for i, j in pairs) / slots
    s2 = 100.0 * sum(_series_value_score(pred[i], gt[j]) for i, j in pairs) / slots
    s3 = weight * s1 + (1.0 - weight) * s2
    return {"s1": s1, "s2": s2, "s3": s3}


# ---------------------------------------------------------------------------
# Report assembly
# ---------------------------------------------------------------------------

REPORT_FIELDS = ("f_iou_50", "f_iou_70", "f_iou_90", "score_a", "s1", "s2", "s3")


@dataclass
class EvalReport:
    per_image: dict[str, dict[str, float]] = field(default_factory=dict)
    version: str = METRICS_VERSION

    def add(self, image_id: str, scores: dict[str, float]) -> None:
        for k, v in scores.items():
            if k not in REPORT_FIELDS:
                raise ValueError(f"unknown metric field {k!r}")
            if not 0.0 <= v <= 100.0:
                raise ValueError(f"score out of range: {k}={v}")
        self.per_image[image_id] = dict(scores)

    @property
    def aggregate(self) -> dict[str, float]:
        out = {}
        for name in REPORT_FIELDS:
            values = [s[name] for s in self.per_image.values() if name in s]
            if values:
                out[name] = float(np.mean(values))
        return out

    def to_json_obj(self) -> dict:
        ordered = {k: self.per_image[k] for k in sorted(self.per_image)}
        return {"version": self.version, "per_image": ordered, "aggregate": self.aggregate}

    def to_text_table(self) -> str:
        """Aligned plain-text table: one row per image plus the aggregate."""
        headers = ["image_id"] + list(REPORT_FIELDS)
        rows = []
        for image_id in sorted(self.per_image):
            scores = self.per_image[image_id]
            rows.append([image_id] + [
                f"{scores[f]:.2f}" if f in scores else "-" for f in REPORT_FIELDS
            ])
        agg = self.aggregate
        rows.append(["AGGREGATE"] + [
            f"{agg[f]:.2f}" if f in agg else "-" for f in REPORT_FIELDS
        ])
        widths = [max(len(h), *(len(r[i]) for r in rows)) for i, h in enumerate(headers)]
        lines = [f"# metrics: {self.version}"]
        lines.append("  ".join(h.ljust(w) for h, w in zip(headers, widths)).rstrip())
        lines.append("  ".join("-" * w for w in widths))
        for r in rows:
            lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
        return "\n".join(lines) + "\n"
