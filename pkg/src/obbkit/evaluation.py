"""Rotated NMS, VOC-style detection matching, and average precision.

AP comes in the two PASCAL flavors: the 2007 11-point interpolation and the
2012 area under the monotone precision-recall envelope.  Ground truths
flagged difficult never count toward the AP denominator, and detections
whose best match is difficult are ignored rather than penalized.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .assignment import MatchingConfig, assign_labels
from .geometry import RotatedBox, rotated_iou


@dataclass(frozen=True)
class DetectionRecord:
    image_id: str
    box: RotatedBox
    class_id: int
    score: float

    def __post_init__(self):
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score must be in [0, 1], got {self.score}")


@dataclass(frozen=True)
class GroundTruthRecord:
    image_id: str
    box: RotatedBox
    class_id: int
    difficult: bool = False


class ApVariant(enum.Enum):
    VOC07 = "voc07"   # 11-point interpolated
    VOC12 = "voc12"   # area under the monotone PR envelope


class MatchOutcome(enum.Enum):
    TP = "tp"
    FP = "fp"
    IGNORED = "ignored"


def rotated_nms(dets: Sequence[DetectionRecord], iou_threshold: float) -> list[DetectionRecord]:
    """Greedy suppression by descending score over rotated IoU.

    A detection is kept iff its IoU with every previously kept detection is
    strictly below the threshold.  Score ties break by input index, and the
    output is ordered (score desc, input index asc).
    """
    if not 0.0 < iou_threshold < 1.0:
        raise ValueError(f"iou_threshold must be in (0, 1), got {iou_threshold}")
    order = sorted(range(len(dets)), key=lambda i: (-dets[i].score, i))
    kept: list[int] = []
    for i in order:
        if all(rotated_iou(dets[i].box, dets[j].box) < iou_threshold for j in kept):
            kept.append(i)
    return [dets[i] for i in kept]


def match_detections(dets: Sequence[DetectionRecord],
                     gts: Sequence[GroundTruthRecord],
                     iou_threshold: float = 0.5) -> list[MatchOutcome]:
    """TP/FP/ignored flags for one image-class group of detections.

    Processes detections by (score desc, input index asc); each claims the
    unclaimed ground truth of highest IoU >= threshold.  Claiming a
    difficult ground truth ignores the detection; claiming nothing is a FP.
    Returned flags are aligned with the input order.
    """
    order = sorted(range(len(dets)), key=lambda i: (-dets[i].score, i))
    claimed = [False] * len(gts)
    out: list[MatchOutcome] = [MatchOutcome.FP] * len(dets)
    for i in order:
        best_j = -1
        best_iou = 0.0
        for j, gt in enumerate(gts):
            if claimed[j]:
                continue
            iou = rotated_iou(dets[i].box, gt.box)
            if iou >= iou_threshold and iou > best_iou:
                best_iou = iou
                best_j = j
        if best_j < 0:
            out[i] = MatchOutcome.FP
        else:
            claimed[best_j] = True
            out[i] = MatchOutcome.IGNORED if gts[best_j].difficult else MatchOutcome.TP
    return out


def average_precision(tp_flags: Sequence[bool], scores: Sequence[float],
                      n_positive: int, variant: ApVariant) -> float:
    """AP from per-detection TP flags; ignored detections must be pre-filtered.

    n_positive is the number of non-difficult ground truths.
    """
    if len(tp_flags) != len(scores):
        raise ValueError("flags and scores differ in length")
    if n_positive <= 0:
        return 0.0
    order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
    tp = np.cumsum([1.0 if tp_flags[i] else 0.0 for i in order])
    fp = np.cumsum([0.0 if tp_flags[i] else 1.0 for i in order])
    recall = tp / n_positive
    precision = tp / np.maximum(tp + fp, 1e-12)

    if variant is ApVariant.VOC07:
        total = 0.0
        for t in (i / 10 for i in range(11)):  # exact decimals, unlike arange
            mask = recall >= t
            total += precision[mask].max() if mask.any() else 0.0
        return float(total) / 11.0

    # VOC12: monotone envelope, integrated over recall steps
    mrec = np.concatenate(([0.0], recall, [1.0]))
    mpre = np.concatenate(([0.0], precision, [0.0]))
    for i in range(len(mpre) - 2, -1, -1):
        mpre[i] = max(mpre[i], mpre[i + 1])
    steps = np.flatnonzero(mrec[1:] != mrec[:-1])
    return float(np.sum((mrec[steps + 1] - mrec[steps]) * mpre[steps + 1]))


def mean_ap(dets: Sequence[DetectionRecord], gts: Sequence[GroundTruthRecord],
            variant: ApVariant, iou_threshold: float = 0.5) -> tuple[dict[int, float], float]:
    """Per-class AP and its unweighted mean over classes present in the truth."""
    classes = sorted({gt.class_id for gt in gts})
    per_class: dict[int, float] = {}
    for cls in classes:
        gts_c = [g for g in gts if g.class_id == cls]
        n_positive = sum(1 for g in gts_c if not g.difficult)
        dets_c = sorted((d for d in dets if d.class_id == cls),
                        key=lambda d: -d.score)
        gts_by_image: dict[str, list[GroundTruthRecord]] = {}
        for g in gts_c:
            gts_by_image.setdefault(g.image_id, []).append(g)

        claimed: dict[str, list[bool]] = {k: [False] * len(v) for k, v in gts_by_image.items()}
        flags: list[bool] = []
        scores: list[float] = []
        for d in dets_c:
            group = gts_by_image.get(d.image_id, [])
            used = claimed.get(d.image_id, [])
            best_j, best_iou = -1, 0.0
            for j, g in enumerate(group):
                if used[j]:
                    continue
                iou = rotated_iou(d.box, g.box)
                if iou >= iou_threshold and iou > best_iou:
                    best_iou, best_j = iou, j
            if best_j >= 0:
                used[best_j] = True
                if group[best_j].difficult:
                    continue  # ignored: contributes to neither TP nor FP
                flags.append(True)
            else:
                flags.append(False)
            scores.append(d.score)
        per_class[cls] = average_precision(flags, scores, n_positive, variant)
    m_ap = sum(per_class.values()) / len(per_class) if per_class else 0.0
    return per_class, m_ap


@dataclass(frozen=True)
class AnchorQualityStats:
    """Fractions describing how label assignment relates to regressed quality."""

    positive_high_quality_ratio: float
    high_quality_from_negative_ratio: float
    n_positive: int
    n_high_quality: int


def anchor_quality_stats(images: Iterable[tuple[Sequence[RotatedBox], Sequence[RotatedBox], Sequence[RotatedBox]]],
                         cfg: MatchingConfig = MatchingConfig(),
                         iou_out_threshold: float = 0.5) -> AnchorQualityStats:
    """Quality statistics over (anchors, regressed, targets) image triples.

    An anchor counts as high quality when its regressed box overlaps some
    target with IoU strictly above the threshold.  Reported are the
    fraction of positives that are high quality and the fraction of
    high-quality anchors that were labeled negative.
    """
    n_pos = 0
    n_pos_hq = 0
    n_hq = 0
    n_hq_neg = 0
    for anchors, regressed, targets in images:
        result = assign_labels(anchors, regressed, targets, cfg)
        for i in range(len(anchors)):
            iou_out = max((rotated_iou(regressed[i], t) for t in targets), default=0.0)
            hq = iou_out > iou_out_threshold
            if result.is_positive[i]:
                n_pos += 1
                n_pos_hq += hq
            if hq:
                n_hq += 1
                n_hq_neg += not result.is_positive[i]
    return AnchorQualityStats(
        positive_high_quality_ratio=n_pos_hq / n_pos if n_pos else 0.0,
        high_quality_from_negative_ratio=n_hq_neg / n_hq if n_hq else 0.0,
        n_positive=n_pos,
        n_high_quality=n_hq,
    )
