"""Command-line entry points for batch geometry, assignment, and evaluation.

Subcommands: iou, assign, eval, tile, analyze.  All outputs are written
with fixed ordering and shortest round-trip float formatting, so identical
inputs and flags produce byte-identical files regardless of --threads.

Exit codes: 0 success, 1 I/O or internal failure, 2 bad usage/unknown flag,
3 input schema or parse error, 4 flag value out of range.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import dataio
from .assignment import AssignmentResult, MatchingConfig, assign_labels
from .anchors import encode_offsets
from .dataio import ParseError, SchemaError
from .evaluation import ApVariant, anchor_quality_stats, mean_ap, rotated_nms
from .geometry import rotated_iou
from .losses import LossConfig, LossReport, classification_loss, combined_loss, regression_loss

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_SCHEMA = 3
EXIT_RANGE = 4


class RangeError(ValueError):
    """A numeric flag value is outside its documented range."""


def _check(cond: bool, message: str) -> None:
    if not cond:
        raise RangeError(message)


def _fmt(value) -> str:
    return repr(float(value)) if isinstance(value, float) else str(value)


def _map_images(fn, items, threads: int):
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def _open_out(path):
    return open(path, "w", encoding="utf-8", newline="\n")


# ---------------------------------------------------------------------------
# subcommands

def _cmd_iou(args) -> int:
    boxes_a = dataio.read_boxes(args.boxes_a)
    boxes_b = dataio.read_boxes(args.boxes_b)

    def one_row(a):
        return [rotated_iou(a, b) for b in boxes_b]

    rows = _map_images(one_row, boxes_a, args.threads)
    with _open_out(args.output) as fh:
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    return EXIT_OK


def _matching_config(args, stage: str) -> MatchingConfig:
    _check(0.0 <= args.alpha <= 1.0, f"--alpha must be in [0, 1], got {args.alpha}")
    _check(args.gamma > 0.0, f"--gamma must be positive, got {args.gamma}")
    threshold = args.threshold
    if threshold is not None:
        _check(-1.0 <= threshold <= 1.0, f"--threshold must be in [-1, 1], got {threshold}")
    return MatchingConfig(alpha=args.alpha, gamma=args.gamma, stage=stage,
                          pos_threshold=threshold)


def _concat_assignments(parts: list[AssignmentResult], target_counts: list[int]) -> AssignmentResult:
    offs = np.cumsum([0] + target_counts[:-1])
    matched = []
    for res, off in zip(parts, offs):
        idx = res.target_index.copy()
        idx[idx >= 0] += off
        matched.append(idx)
    return AssignmentResult(
        is_positive=np.concatenate([r.is_positive for r in parts]),
        target_index=np.concatenate(matched),
        matching_degree=np.concatenate([r.matching_degree for r in parts]),
        weight=np.concatenate([r.weight for r in parts]),
    )


def _loss_report(entries, per_refine, per_detect, loss_cfg: LossConfig) -> LossReport:
    counts = [len(e.targets) for e in entries]
    refine = _concat_assignments(per_refine, counts)
    detect = _concat_assignments(per_detect, counts)

    pred, target = [], []
    for e, res in zip(entries, per_detect):
        for i, (anchor, reg) in enumerate(zip(e.anchors, e.regressed)):
            pred.append(encode_offsets(anchor, reg))
            j = int(res.target_index[i])
            target.append(encode_offsets(anchor, e.targets[j].box) if j >= 0 else pred[-1])
    # refinement targets re-encoded against that stage's matching
    pred_r, target_r = [], []
    for e, res in zip(entries, per_refine):
        for i, (anchor, reg) in enumerate(zip(e.anchors, e.regressed)):
            pred_r.append(encode_offsets(anchor, reg))
            j = int(res.target_index[i])
            target_r.append(encode_offsets(anchor, e.targets[j].box) if j >= 0 else pred_r[-1])

    if all(e.scores is not None for e in entries):
        probs = np.concatenate([np.asarray(e.scores, dtype=np.float64) for e in entries])
        classes = [0] * sum(counts)
        cls = classification_loss(probs[:, None], classes, detect, loss_cfg)
    else:
        cls = 0.0
    ref = regression_loss(pred_r, target_r, refine, loss_cfg)
    reg = regression_loss(pred, target, detect, loss_cfg)
    return LossReport(
        classification=cls,
        refinement=ref,
        regression=reg,
        total=combined_loss(cls, ref, reg, loss_cfg),
        n_pos_refinement=refine.n_positive,
        n_neg_refinement=refine.n_negative,
        n_pos_detection=detect.n_positive,
        n_neg_detection=detect.n_negative,
    )


def _cmd_assign(args) -> int:
    entries = dataio.read_dump(args.dump)
    cfg_main = _matching_config(args, args.stage)
    cfg_refine = MatchingConfig(alpha=args.alpha, gamma=args.gamma, stage="refinement")
    cfg_detect = MatchingConfig(alpha=args.alpha, gamma=args.gamma, stage="detection")

    def one(entry):
        boxes = entry.target_boxes
        return (assign_labels(entry.anchors, entry.regressed, boxes, cfg_main),
                assign_labels(entry.anchors, entry.regressed, boxes, cfg_refine),
                assign_labels(entry.anchors, entry.regressed, boxes, cfg_detect))

    results = _map_images(one, entries, args.threads)

    with _open_out(args.output) as fh:
        for entry, (res, _, _) in zip(entries, results):
            fh.write(json.dumps({
                "schema_version": dataio.SCHEMA_VERSION,
                "image_id": entry.image_id,
                "stage": cfg_main.stage,
                "labels": [int(v) for v in res.is_positive],
                "matched": [int(v) for v in res.target_index],
                "matching_degree": [float(v) for v in res.matching_degree],
                "weights": [float(v) for v in res.weight],
            }) + "\n")

    if args.report:
        report = _loss_report(entries, [r[1] for r in results], [r[2] for r in results],
                              LossConfig())
        with _open_out(args.report) as fh:
            fh.write("metric,value\n")
            fh.write(f"cls_loss,{_fmt(report.classification)}\n")
            fh.write(f"ref_loss,{_fmt(report.refinement)}\n")
            fh.write(f"reg_loss,{_fmt(report.regression)}\n")
            fh.write(f"total_loss,{_fmt(report.total)}\n")
            fh.write(f"n_pos_refinement,{report.n_pos_refinement}\n")
            fh.write(f"n_neg_refinement,{report.n_neg_refinement}\n")
            fh.write(f"n_pos_detection,{report.n_pos_detection}\n")
            fh.write(f"n_neg_detection,{report.n_neg_detection}\n")
    return EXIT_OK


def _cmd_eval(args) -> int:
    _check(0.0 < args.iou_threshold < 1.0,
           f"--iou-threshold must be in (0, 1), got {args.iou_threshold}")
    _check(0.0 < args.nms_threshold < 1.0,
           f"--nms-threshold must be in (0, 1), got {args.nms_threshold}")
    dets = dataio.read_detections(args.detections)
    anns = dataio.read_annotations(args.annotations)
    gts = [g for a in anns for g in a.objects]

    if not args.no_nms:
        groups: dict[tuple[str, int], list] = {}
        for d in dets:
            groups.setdefault((d.image_id, d.class_id), []).append(d)
        keys = sorted(groups)
        kept = _map_images(lambda k: rotated_nms(groups[k], args.nms_threshold),
                           keys, args.threads)
        dets = [d for group in kept for d in group]

    variant = ApVariant(args.variant)
    per_class, m_ap = mean_ap(dets, gts, variant, iou_threshold=args.iou_threshold)
    with _open_out(args.output) as fh:
        fh.write("class,metric,value\n")
        for cls in sorted(per_class):
            fh.write(f"{cls},AP,{_fmt(per_class[cls])}\n")
        fh.write(f"all,mAP,{_fmt(m_ap)}\n")
    for cls in sorted(per_class):
        print(f"class {cls}: AP {_fmt(per_class[cls])}")
    print(f"mAP ({variant.value}): {_fmt(m_ap)} over {len(per_class)} classes")
    return EXIT_OK


def _cmd_tile(args) -> int:
    _check(args.side > 0, f"--side must be positive, got {args.side}")
    _check(args.stride > 0, f"--stride must be positive, got {args.stride}")
    _check(0.0 <= args.keep_fraction <= 1.0,
           f"--keep-fraction must be in [0, 1], got {args.keep_fraction}")
    anns = dataio.read_annotations(args.annotations)

    def one(ann):
        tiles = []
        for win in dataio.tile_windows(ann.width, ann.height, args.side, args.stride):
            kept = dataio.clip_to_window(ann.objects, win, args.keep_fraction)
            wid = f"{ann.image_id}__{int(win.x)}_{int(win.y)}"
            tiles.append(dataio.ImageAnnotation(
                image_id=wid, width=args.side, height=args.side,
                objects=[dataio.GroundTruthRecord(wid, o.box, o.class_id, o.difficult)
                         for o in kept]))
        return tiles

    tiled = _map_images(one, anns, args.threads)
    dataio.write_annotations([t for tiles in tiled for t in tiles], args.output)
    return EXIT_OK


def _cmd_analyze(args) -> int:
    _check(0.0 < args.iou_out_threshold < 1.0,
           f"--iou-out-threshold must be in (0, 1), got {args.iou_out_threshold}")
    entries = dataio.read_dump(args.dump)
    cfg = _matching_config(args, args.stage)
    stats = anchor_quality_stats(
        ((e.anchors, e.regressed, e.target_boxes) for e in entries),
        cfg, iou_out_threshold=args.iou_out_threshold)
    with _open_out(args.output) as fh:
        fh.write("metric,value\n")
        fh.write(f"positive_high_quality_ratio,{_fmt(stats.positive_high_quality_ratio)}\n")
        fh.write(f"high_quality_from_negative_ratio,{_fmt(stats.high_quality_from_negative_ratio)}\n")
        fh.write(f"n_positive,{stats.n_positive}\n")
        fh.write(f"n_high_quality,{stats.n_high_quality}\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser

def _add_matching_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=float, default=0.5,
                   help="matching-degree overlap blend, in [0, 1] (default 0.5)")
    p.add_argument("--gamma", type=float, default=4.0,
                   help="uncertainty penalty exponent, > 0 (default 4)")
    p.add_argument("--stage", choices=("refinement", "detection"), default="detection",
                   help="stage preset: positive threshold 0.4 / 0.6 (default detection)")
    p.add_argument("--threshold", type=float, default=None,
                   help="override the stage's positive threshold, in [-1, 1]")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="obbkit",
        description="Rotated-box geometry, label assignment, and VOC-style evaluation.",
        epilog="Exit codes: 0 success, 1 I/O or internal failure, 2 bad usage, "
               "3 input schema/parse error, 4 flag value out of range.",
    )
    parser.add_argument("--threads", type=int, default=1,
                        help="worker threads for per-image/per-class work (default 1); "
                             "outputs are identical for any value")
    parser.add_argument("--seed", type=int, default=0,
                        help="seed for any sampling utility (core paths are deterministic)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("iou", help="pairwise rotated IoU matrix of two box files")
    p.add_argument("boxes_a", help="text file: one 'cx cy w h theta' box per line")
    p.add_argument("boxes_b")
    p.add_argument("-o", "--output", required=True, help="CSV matrix, rows follow file A")
    p.set_defaults(func=_cmd_iou)

    p = sub.add_parser("assign", help="label anchors in a dump and report losses")
    p.add_argument("--dump", required=True, help="anchor dump (JSONL)")
    _add_matching_flags(p)
    p.add_argument("-o", "--output", required=True, help="assignment dump (JSONL)")
    p.add_argument("--report", default=None, help="loss report CSV (metric,value)")
    p.set_defaults(func=_cmd_assign)

    p = sub.add_parser("eval", help="AP/mAP of detections against annotations")
    p.add_argument("--detections", required=True, help="detections JSONL")
    p.add_argument("--annotations", required=True, help="annotations JSONL")
    p.add_argument("--variant", choices=("voc07", "voc12"), default="voc07",
                   help="AP definition (default voc07)")
    p.add_argument("--iou-threshold", type=float, default=0.5,
                   help="match threshold in (0, 1) (default 0.5)")
    p.add_argument("--nms-threshold", type=float, default=0.5,
                   help="per image-class NMS threshold in (0, 1) (default 0.5)")
    p.add_argument("--no-nms", action="store_true", help="evaluate detections as-is")
    p.add_argument("-o", "--output", required=True, help="AP report CSV (class,metric,value)")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("tile", help="split annotations into sliding-window patches")
    p.add_argument("--annotations", required=True, help="annotations JSONL")
    p.add_argument("--side", type=int, default=800, help="window side in pixels (default 800)")
    p.add_argument("--stride", type=int, default=200, help="window stride in pixels (default 200)")
    p.add_argument("--keep-fraction", type=float, default=0.5,
                   help="minimum in-window area fraction to keep a box (default 0.5)")
    p.add_argument("-o", "--output", required=True, help="per-window annotations JSONL")
    p.set_defaults(func=_cmd_tile)

    p = sub.add_parser("analyze", help="anchor quality statistics from a dump")
    p.add_argument("--dump", required=True, help="anchor dump (JSONL)")
    _add_matching_flags(p)
    p.add_argument("--iou-out-threshold", type=float, default=0.5,
                   help="regressed-overlap threshold for 'high quality' (default 0.5)")
    p.add_argument("-o", "--output", required=True, help="statistics CSV (metric,value)")
    p.set_defaults(func=_cmd_analyze)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        print("obbkit: --threads must be >= 1", file=sys.stderr)
        return EXIT_RANGE
    try:
        return args.func(args)
    except RangeError as exc:
        print(f"obbkit: {exc}", file=sys.stderr)
        return EXIT_RANGE
    except (ParseError, SchemaError) as exc:
        print(f"obbkit: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except OSError as exc:
        print(f"obbkit: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
