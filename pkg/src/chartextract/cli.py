"""Command-line pipeline: generate, detect, convert, evaluate, pipeline.

Exit codes: 0 success, 1 unexpected internal failure, 2 usage/config error.
All outputs are written atomically (temp file + rename), so an interrupted
run never leaves partially written files behind.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import traceback
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import convert as conv
from . import detect as det
from . import evaluate as ev
from . import synthgen
from .errors import ChartExtractError
from .fileio import atomic_write_bytes
from .model import (
    ChartAnnotation,
    ChartType,
    DetectionSet,
    ScaleKind,
    parse_annotation,
    parse_detections,
    parse_series_json,
    serialize_detections,
    serialize_series_csv,
    serialize_series_json,
)
from .raster.image import ImageBuffer, decode_image, encode_image

OVERLAY_COLOR = (255, 0, 0)

_TYPE_ALIASES = {
    "bar": ChartType.BAR_VERTICAL,
    "boxplot": ChartType.BOXPLOT_VERTICAL,
}


class UsageError(ChartExtractError):
    """Bad flag combination or input configuration; maps to exit code 2."""


def _parse_types(text: str) -> list[ChartType]:
    out = []
    for name in text.split(","):
        name = name.strip()
        if name in _TYPE_ALIASES:
            out.append(_TYPE_ALIASES[name])
            continue
        try:
            out.append(ChartType.from_string(name))
        except ValueError as exc:
            raise UsageError(f"--types: {exc}") from exc
    if not out:
        raise UsageError("--types: no chart types given")
    return out


def _jobs(args) -> int:
    if args.jobs is not None:
        return max(1, args.jobs)
    env = os.environ.get("CHARTEXTRACT_JOBS")
    return max(1, int(env)) if env else 1


def _map_images(jobs: int, fn, items: list) -> list:
    if jobs <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _load_manifest(corpus: Path) -> dict:
    path = corpus / "manifest.json"
    if not path.is_file():
        raise UsageError(f"no manifest.json in {corpus}")
    return json.loads(path.read_text())


# ---------------------------------------------------------------------------
# generate
# ---------------------------------------------------------------------------


def _cmd_generate(args) -> int:
    types = _parse_types(args.types)
    mix = {t: 1.0 for t in types}
    overrides: dict = {}
    if args.series is not None:
        overrides["n_series"] = args.series
    if args.items is not None:
        overrides["n_items"] = args.items
    if args.no_gridlines:
        overrides["gridlines"] = False
    if args.min_marker_sep is not None:
        overrides["min_marker_sep"] = None if args.min_marker_sep <= 0 else args.min_marker_sep
    if args.pair_spacing is not None:
        overrides["pair_spacing"] = args.pair_spacing
    if args.value_range is not None:
        try:
            lo, hi = (float(v) for v in args.value_range.split(","))
        except ValueError as exc:
            raise UsageError("--value-range expects 'lo,hi'") from exc
        overrides["value_range"] = (lo, hi)
    if args.scale is not None:
        overrides["scale"] = ScaleKind(args.scale)
    overrides["width"] = args.width
    overrides["height"] = args.height
    synthgen.generate_corpus(args.seed, args.count, mix, args.out, overrides)
    print(str(Path(args.out) / "manifest.json"))
    return 0


# ---------------------------------------------------------------------------
# detect
# ---------------------------------------------------------------------------


def _draw_overlay(img: ImageBuffer, detections: DetectionSet) -> ImageBuffer:
    canvas = img.array.copy()
    h, w = canvas.shape[:2]
    if detections.kind == "boxes":
        for bb, _ in detections.boxes:
            x0, y0 = max(0, int(round(bb.x0))), max(0, int(round(bb.y0)))
            x1, y1 = min(w, int(round(bb.x1))), min(h, int(round(bb.y1)))
            if x1 <= x0 or y1 <= y0:
                continue
            canvas[y0, x0:x1] = OVERLAY_COLOR
            canvas[y1 - 1, x0:x1] = OVERLAY_COLOR
            canvas[y0:y1, x0] = OVERLAY_COLOR
            canvas[y0:y1, x1 - 1] = OVERLAY_COLOR
    else:
        for p, _ in detections.points:
            y0, y1 = max(0, int(p.y) - 2), min(h, int(p.y) + 3)
            x0, x1 = max(0, int(p.x) - 2), min(w, int(p.x) + 3)
            canvas[y0:y1, x0:x1] = OVERLAY_COLOR
    return ImageBuffer(canvas)


def _run_detector(detector: str, img: ImageBuffer, annotation: ChartAnnotation) -> DetectionSet:
    if detector == "cc-bars":
        if not annotation.chart_type.uses_boxes:
            raise UsageError(
                f"--detector cc-bars cannot run on {annotation.chart_type.value} charts"
            )
        result = det.detect_bars(img, det.BarDetectParams(plot_bb=annotation.plot_bb))
    elif detector == "cc-points":
        if not annotation.chart_type.uses_points:
            raise UsageError(
                f"--detector cc-points cannot run on {annotation.chart_type.value} charts"
            )
        result = det.detect_points(img, det.PointDetectParams(plot_bb=annotation.plot_bb))
    else:
        raise UsageError(f"unknown detector {detector!r}")
    from dataclasses import replace

    return replace(result, image_id=annotation.image_id)


def _cmd_detect(args) -> int:
    if args.detector == "external-file":
        if not args.external:
            raise UsageError("--detector external-file requires --external FILE")
        detections = parse_detections(Path(args.external).read_bytes())
        atomic_write_bytes(args.out, serialize_detections(detections))
        return 0

    if args.corpus:
        corpus = Path(args.corpus)
        manifest = _load_manifest(corpus)
        out_dir = Path(args.out)

        def run(chart) -> None:
            annotation = parse_annotation((corpus / chart["annotation"]).read_bytes())
            if args.detector == "oracle":
                detections = parse_detections((corpus / chart["gt_detections"]).read_bytes())
            else:
                img = decode_image((corpus / chart["image"]).read_bytes())
                detections = _run_detector(args.detector, img, annotation)
            atomic_write_bytes(
                out_dir / f"{chart['id']}.detections.json", serialize_detections(detections)
            )
            if args.overlay:
                img = decode_image((corpus / chart["image"]).read_bytes())
                atomic_write_bytes(
                    out_dir / f"{chart['id']}.overlay.png",
                    encode_image(_draw_overlay(img, detections)),
                )

        # validate detector/type compatibility up front so a bad flag fails
        # before any file is written
        for chart in manifest["charts"]:
            ct = ChartType.from_string(chart["chart_type"])
            if args.detector == "cc-bars" and not ct.uses_boxes:
                raise UsageError(f"--detector cc-bars cannot run on {ct.value} charts")
            if args.detector == "cc-points" and not ct.uses_points:
                raise UsageError(f"--detector cc-points cannot run on {ct.value} charts")
        _map_images(_jobs(args), run, manifest["charts"])
        return 0

    if not (args.image and args.annotation):
        raise UsageError("detect needs either --corpus or both --image and --annotation")
    if args.detector == "oracle":
        raise UsageError("--detector oracle is only available in --corpus mode")
    annotation = parse_annotation(Path(args.annotation).read_bytes())
    img = decode_image(Path(args.image).read_bytes())
    detections = _run_detector(args.detector, img, annotation)
    atomic_write_bytes(args.out, serialize_detections(detections))
    if args.overlay:
        if args.overlay is True:
            raise UsageError("--overlay needs a file path in single-image mode")
        atomic_write_bytes(args.overlay, encode_image(_draw_overlay(img, detections)))
    return 0


# ---------------------------------------------------------------------------
# convert
# ---------------------------------------------------------------------------

_FEATURE_KINDS = {"rgb": "rgb-hist", "rgb+hsv": "concat", "embedding": "external-embedding"}


def _load_embedding_map(args):
    if args.features != "embedding":
        return None
    if not args.embeddings:
        raise UsageError("--features embedding requires --embeddings FILE")
    path = Path(args.embeddings)
    if not path.is_file():
        raise UsageError(f"embeddings file not found: {path}")
    return conv.load_embeddings(path.read_bytes())


def _cmd_convert(args) -> int:
    feature_kind = _FEATURE_KINDS[args.features]
    embeddings = _load_embedding_map(args)

    if args.corpus:
        corpus = Path(args.corpus)
        manifest = _load_manifest(corpus)
        det_dir = Path(args.detections_dir) if args.detections_dir else corpus / "gt"
        out_dir = Path(args.out)

        def run(chart) -> None:
            annotation = parse_annotation((corpus / chart["annotation"]).read_bytes())
            det_path = det_dir / f"{chart['id']}.detections.json"
            detections = parse_detections(det_path.read_bytes())
            img = None
            if annotation.legends and feature_kind != "external-embedding":
                img = decode_image((corpus / chart["image"]).read_bytes())
            series = conv.convert(img, annotation, detections, feature_kind, embeddings)
            atomic_write_bytes(out_dir / f"{chart['id']}.series.json", serialize_series_json(series))

        _map_images(_jobs(args), run, manifest["charts"])
        return 0

    if not (args.annotation and args.detections):
        raise UsageError("convert needs either --corpus or --annotation plus --detections")
    annotation = parse_annotation(Path(args.annotation).read_bytes())
    detections = parse_detections(Path(args.detections).read_bytes())
    img = None
    if args.image:
        img = decode_image(Path(args.image).read_bytes())
    series = conv.convert(img, annotation, detections, feature_kind, embeddings)
    atomic_write_bytes(args.out, serialize_series_json(series))
    if args.csv:
        atomic_write_bytes(args.csv, serialize_series_csv(series))
    return 0


# ---------------------------------------------------------------------------
# evaluate
# ---------------------------------------------------------------------------


def _score_image(corpus: Path, chart: dict, pred_dir: Path, weight: float) -> tuple[str, dict]:
    scores: dict[str, float] = {}
    annotation = parse_annotation((corpus / chart["annotation"]).read_bytes())
    gt_det = parse_detections((corpus / chart["gt_detections"]).read_bytes())

    det_path = pred_dir / f"{chart['id']}.detections.json"
    if det_path.is_file():
        pred = parse_detections(det_path.read_bytes())
        if pred.kind != gt_det.kind:
            raise UsageError(
                f"{chart['id']}: prediction kind {pred.kind} does not match ground truth {gt_det.kind}"
            )
        if gt_det.kind == "boxes":
            pb = [bb for bb, _ in pred.boxes]
            gb = [bb for bb, _ in gt_det.boxes]
            scores["f_iou_50"] = ev.f_measure_at_iou(pb, gb, 0.5)
            scores["f_iou_70"] = ev.f_measure_at_iou(pb, gb, 0.7)
            scores["f_iou_90"] = ev.f_measure_at_iou(pb, gb, 0.9)
            scores["score_a"] = ev.score_boxes(pb, gb)
        else:
            pp = [p for p, _ in pred.points]
            gp = [p for p, _ in gt_det.points]
            scores["score_a"] = ev.score_points(pp, gp, annotation.plot_bb)

    series_path = pred_dir / f"{chart['id']}.series.json"
    if series_path.is_file():
        pred_series = parse_series_json(series_path.read_bytes())
        gt_series = parse_series_json((corpus / chart["gt_series"]).read_bytes())
        scores.update(ev.score_series(pred_series, gt_series, weight))
    return chart["id"], scores


def _evaluate_corpus(corpus: Path, pred_dir: Path, weight: float, jobs: int) -> ev.EvalReport:
    manifest = _load_manifest(corpus)
    report = ev.EvalReport()
    results = _map_images(
        jobs, lambda chart: _score_image(corpus, chart, pred_dir, weight), manifest["charts"]
    )
    for image_id, scores in results:
        if scores:
            report.add(image_id, scores)
    return report


def _write_report(report: ev.EvalReport, out_prefix: str) -> None:
    obj = report.to_json_obj()
    atomic_write_bytes(out_prefix + ".json", (json.dumps(obj, indent=2) + "\n").encode())
    atomic_write_bytes(out_prefix + ".txt", report.to_text_table().encode())


def _cmd_evaluate(args) -> int:
    report = _evaluate_corpus(Path(args.corpus), Path(args.pred), args.series_weight, _jobs(args))
    if args.out:
        _write_report(report, args.out)
    sys.stdout.write(report.to_text_table())
    return 0


# ---------------------------------------------------------------------------
# pipeline
# ---------------------------------------------------------------------------


def _cmd_pipeline(args) -> int:
    out = Path(args.out)
    corpus_dir = out / "corpus"
    pred_dir = out / "pred"

    types = _parse_types(args.types)
    mix = {t: 1.0 for t in types}
    overrides: dict = {}
    if args.series is not None:
        overrides["n_series"] = args.series
    if args.no_gridlines:
        overrides["gridlines"] = False
    manifest = synthgen.generate_corpus(args.seed, args.count, mix, corpus_dir, overrides)

    feature_kind = _FEATURE_KINDS[args.features]
    embeddings = _load_embedding_map(args)
    jobs = _jobs(args)

    def run(chart) -> None:
        annotation = parse_annotation((corpus_dir / chart["annotation"]).read_bytes())
        if args.detector == "oracle":
            detections = parse_detections((corpus_dir / chart["gt_detections"]).read_bytes())
        else:
            img = decode_image((corpus_dir / chart["image"]).read_bytes())
            detections = _run_detector(args.detector, img, annotation)
        atomic_write_bytes(
            pred_dir / f"{chart['id']}.detections.json", serialize_detections(detections)
        )
        img = None
        if annotation.legends and feature_kind != "external-embedding":
            img = decode_image((corpus_dir / chart["image"]).read_bytes())
        series = conv.convert(img, annotation, detections, feature_kind, embeddings)
        atomic_write_bytes(pred_dir / f"{chart['id']}.series.json", serialize_series_json(series))

    for chart in manifest["charts"]:
        ct = ChartType.from_string(chart["chart_type"])
        if args.detector == "cc-bars" and not ct.uses_boxes:
            raise UsageError(f"--detector cc-bars cannot run on {ct.value} charts")
        if args.detector == "cc-points" and not ct.uses_points:
            raise UsageError(f"--detector cc-points cannot run on {ct.value} charts")
    _map_images(jobs, run, manifest["charts"])

    report = _evaluate_corpus(corpus_dir, pred_dir, args.series_weight, jobs)
    _write_report(report, str(out / "report"))
    agg = report.aggregate
    parts = [f"s0={agg['score_a']:.2f}" if "score_a" in agg else "s0=-"]
    for key in ("s1", "s2", "s3"):
        parts.append(f"{key}={agg[key]:.2f}" if key in agg else f"{key}=-")
    print("aggregate " + " ".join(parts))
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chartextract")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_jobs(p):
        p.add_argument("--jobs", type=int, default=None,
                       help="parallel image workers (default: CHARTEXTRACT_JOBS or 1)")

    g = sub.add_parser("generate", help="write a synthetic chart corpus")
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--count", type=int, required=True)
    g.add_argument("--types", default="bar", help="comma list, e.g. bar,scatter,line,boxplot")
    g.add_argument("--out", required=True)
    g.add_argument("--series", type=int, default=None)
    g.add_argument("--items", type=int, default=None)
    g.add_argument("--width", type=int, default=640)
    g.add_argument("--height", type=int, default=480)
    g.add_argument("--no-gridlines", action="store_true")
    g.add_argument("--min-marker-sep", type=float, default=None,
                   help="minimum scatter marker separation in px; <=0 disables")
    g.add_argument("--pair-spacing", type=float, default=None,
                   help="generate fused scatter marker pairs at this spacing")
    g.add_argument("--value-range", default=None, help="lo,hi")
    g.add_argument("--scale", choices=["linear", "exponential"], default=None)
    g.set_defaults(func=_cmd_generate)

    d = sub.add_parser("detect", help="run a detector, write detection files")
    d.add_argument("--detector", required=True,
                   choices=["cc-bars", "cc-points", "external-file", "oracle"])
    d.add_argument("--corpus", default=None)
    d.add_argument("--image", default=None)
    d.add_argument("--annotation", default=None)
    d.add_argument("--external", default=None, help="detection file to validate and re-emit")
    d.add_argument("--out", required=True)
    d.add_argument("--overlay", default=None, nargs="?", const=True,
                   help="write detection overlay PNG(s)")
    add_jobs(d)
    d.set_defaults(func=_cmd_detect)

    c = sub.add_parser("convert", help="turn detections into data series tables")
    c.add_argument("--corpus", default=None)
    c.add_argument("--detections-dir", default=None)
    c.add_argument("--image", default=None)
    c.add_argument("--annotation", default=None)
    c.add_argument("--detections", default=None)
    c.add_argument("--out", required=True)
    c.add_argument("--csv", default=None, help="also write the delimited-text table here")
    c.add_argument("--features", choices=sorted(_FEATURE_KINDS), default="rgb+hsv")
    c.add_argument("--embeddings", default=None)
    add_jobs(c)
    c.set_defaults(func=_cmd_convert)

    e = sub.add_parser("evaluate", help="score predictions against a corpus")
    e.add_argument("--corpus", required=True)
    e.add_argument("--pred", required=True)
    e.add_argument("--out", default=None, help="report path prefix (.json/.txt)")
    e.add_argument("--series-weight", type=float, default=0.5,
                   help="s3 = w*s1 + (1-w)*s2")
    add_jobs(e)
    e.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("pipeline", help="generate -> detect -> convert -> evaluate")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--types", default="bar")
    p.add_argument("--out", required=True)
    p.add_argument("--detector", default="oracle",
                   choices=["cc-bars", "cc-points", "oracle"])
    p.add_argument("--features", choices=sorted(_FEATURE_KINDS), default="rgb+hsv")
    p.add_argument("--embeddings", default=None)
    p.add_argument("--series", type=int, default=None)
    p.add_argument("--no-gridlines", action="store_true")
    p.add_argument("--series-weight", type=float, default=0.5)
    add_jobs(p)
    p.set_defaults(func=_cmd_pipeline)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ChartExtractError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception:
        traceback.print_exc()
        return 1


if __name__ == "__main__":
    sys.exit(main())
