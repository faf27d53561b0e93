"""Matching-degree computation and dynamic positive/negative sample selection.

The matching degree of an (anchor, target) pair blends the spatial overlap
before regression (iou_in) with the overlap of the regressed box (iou_out),
minus an uncertainty penalty for pairs whose overlap changed drastically:

    md = alpha * iou_in + (1 - alpha) * iou_out - |iou_in - iou_out| ** gamma

Selection: every anchor is matched to its best-md target, anchors at or
above the stage threshold become positives, and each target left without a
positive is given its best available anchor as a fallback.  Positive loss
weights are the per-target matching degrees topped up so the best positive
of every target weighs exactly 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geometry import RotatedBox, rotated_iou

STAGE_THRESHOLDS = {"refinement": 0.4, "detection": 0.6}


@dataclass(frozen=True)
class MatchingConfig:
    """Hyperparameters for matching-degree label assignment."""

    alpha: float = 0.5
    gamma: float = 4.0
    stage: str = "detection"
    pos_threshold: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.gamma <= 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.stage not in STAGE_THRESHOLDS:
            raise ValueError(f"stage must be one of {sorted(STAGE_THRESHOLDS)}, got {self.stage!r}")
        if self.pos_threshold is None:
            object.__setattr__(self, "pos_threshold", STAGE_THRESHOLDS[self.stage])

    @classmethod
    def refinement(cls, alpha: float = 0.5, gamma: float = 4.0) -> "MatchingConfig":
        return cls(alpha=alpha, gamma=gamma, stage="refinement")

    @classmethod
    def detection(cls, alpha: float = 0.5, gamma: float = 4.0) -> "MatchingConfig":
        return cls(alpha=alpha, gamma=gamma, stage="detection")


@dataclass
class AssignmentResult:
    """Per-anchor labels from assign_labels.

    target_index is the matched target (argmax matching degree, possibly
    rewritten by fallback) and is -1 only when there are no targets.
    weight is 0 for negatives.
    """

    is_positive: np.ndarray      # bool (N,)
    target_index: np.ndarray     # int64 (N,)
    matching_degree: np.ndarray  # float64 (N,)
    weight: np.ndarray           # float64 (N,)

    @property
    def n_positive(self) -> int:
        return int(self.is_positive.sum())

    @property
    def n_negative(self) -> int:
        return int(len(self.is_positive) - self.is_positive.sum())


def matching_degree(iou_in, iou_out, cfg: MatchingConfig = MatchingConfig()):
    """Blend of overlaps minus the uncertainty penalty; scalar or arrays."""
    iou_in = np.asarray(iou_in, dtype=np.float64)
    iou_out = np.asarray(iou_out, dtype=np.float64)
    u = np.abs(iou_in - iou_out)
    md = cfg.alpha * iou_in + (1.0 - cfg.alpha) * iou_out - u ** cfg.gamma
    return float(md) if md.ndim == 0 else md


def matching_degree_matrix(anchors: Sequence[RotatedBox],
                           regressed: Sequence[RotatedBox],
                           targets: Sequence[RotatedBox],
                           cfg: MatchingConfig) -> np.ndarray:
    """(N, M) matching degrees between every anchor and every target."""
    n, m = len(anchors), len(targets)
    md = np.zeros((n, m), dtype=np.float64)
    for j, t in enumerate(targets):
        for i in range(n):
            md[i, j] = matching_degree(rotated_iou(anchors[i], t),
                                       rotated_iou(regressed[i], t), cfg)
    return md


def positive_weights(md_pos) -> np.ndarray:
    """Loss weights for one target's positives: md + (1 - max(md))."""
    md_pos = np.asarray(md_pos, dtype=np.float64)
    if md_pos.size == 0:
        raise ValueError("a target must have at least one positive after fallback")
    return md_pos + (1.0 - md_pos.max())


def assign_labels(anchors: Sequence[RotatedBox],
                  regressed: Sequence[RotatedBox],
                  targets: Sequence[RotatedBox],
                  cfg: MatchingConfig = MatchingConfig()) -> AssignmentResult:
    """Split anchors into positives and negatives by matching degree.

    regressed[i] must be the decoded prediction for anchors[i].  With no
    targets every anchor is negative.  Fallback promotion prefers anchors
    that are still negative, so one promotion cannot silently strip an
    earlier target of its only positive; every target ends with at least
    one positive whenever len(anchors) >= len(targets).
    """
    if len(anchors) != len(regressed):
        raise ValueError(f"anchors ({len(anchors)}) and regressed ({len(regressed)}) differ in length")
    n, m = len(anchors), len(targets)
    if m == 0 or n == 0:
        return AssignmentResult(
            is_positive=np.zeros(n, dtype=bool),
            target_index=np.full(n, -1, dtype=np.int64),
            matching_degree=np.zeros(n, dtype=np.float64),
            weight=np.zeros(n, dtype=np.float64),
        )

    md = matching_degree_matrix(anchors, regressed, targets, cfg)
    matched = md.argmax(axis=1)
    best = md[np.arange(n), matched]
    positive = best >= cfg.pos_threshold

    for j in range(m):
        if np.any(positive & (matched == j)):
            continue
        candidates = np.flatnonzero(~positive)
        if candidates.size == 0:
            # all anchors already positive: steal from a target that keeps
            # another positive, or as a last resort from the global argmax
            counts = np.bincount(matched[positive], minlength=m)
            spare = np.flatnonzero(counts[matched] >= 2)
            candidates = spare if spare.size else np.arange(n)
        pick = candidates[md[candidates, j].argmax()]
        positive[pick] = True
        matched[pick] = j
        best[pick] = md[pick, j]

    weight = np.zeros(n, dtype=np.float64)
    for j in range(m):
        idx = np.flatnonzero(positive & (matched == j))
        if idx.size:
            weight[idx] = positive_weights(md[idx, j])

    return AssignmentResult(
        is_positive=positive,
        target_index=matched.astype(np.int64),
        matching_degree=best,
        weight=weight,
    )
