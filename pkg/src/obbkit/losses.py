"""Focal / smooth-L1 primitives and the matching-sensitive training objective.

Positives contribute to classification with a (w + 1) multiplier and to
regression with w itself, where w is the per-target topped-up matching
degree from the assignment step.  The multitask total is

    L = L_cls + lambda_refine * L_refine + lambda_regress * L_regress
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .anchors import BoxOffsets
from .assignment import AssignmentResult

# probabilities are clamped here before any log
PROB_EPS = 1e-6


@dataclass(frozen=True)
class LossConfig:
    focal_alpha: float = 0.25
    focal_gamma: float = 2.0
    smooth_l1_beta: float = 1.0 / 9.0
    lambda_refine: float = 0.5
    lambda_regress: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.focal_alpha < 1.0:
            raise ValueError("focal_alpha must be in (0, 1)")
        if self.focal_gamma < 0:
            raise ValueError("focal_gamma must be >= 0")
        if self.smooth_l1_beta <= 0:
            raise ValueError("smooth_l1_beta must be positive")


@dataclass(frozen=True)
class LossReport:
    """Loss components plus positive/negative counts for both stages."""

    classification: float
    refinement: float
    regression: float
    total: float
    n_pos_refinement: int
    n_neg_refinement: int
    n_pos_detection: int
    n_neg_detection: int


def focal_loss(p: float, is_positive: bool, cfg: LossConfig = LossConfig()) -> float:
    """RetinaNet-style focal term for one probability."""
    p = min(max(float(p), PROB_EPS), 1.0 - PROB_EPS)
    if is_positive:
        return -cfg.focal_alpha * (1.0 - p) ** cfg.focal_gamma * math.log(p)
    return -(1.0 - cfg.focal_alpha) * p ** cfg.focal_gamma * math.log(1.0 - p)


def smooth_l1(x: float, beta: float = 1.0 / 9.0) -> float:
    """Huber-style residual: quadratic below beta, linear above."""
    ax = abs(float(x))
    if ax < beta:
        return 0.5 * ax * ax / beta
    return ax - 0.5 * beta


def classification_loss(probs, target_classes: Sequence[int],
                        assignment: AssignmentResult,
                        cfg: LossConfig = LossConfig()) -> float:
    """Matching-sensitive focal loss over one-vs-all class probabilities.

    probs is (N, K): anchor i's probability for each class.  A positive
    anchor's entry at its matched target's class feeds the positive sum
    with multiplier (w + 1); every other (anchor, class) entry feeds the
    negative sum.  Sums are normalized by the positive / negative anchor
    counts respectively.
    """
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim == 1:
        probs = probs[:, None]
    n, k = probs.shape
    if n != len(assignment.is_positive):
        raise ValueError(f"probs rows ({n}) must match anchor count ({len(assignment.is_positive)})")

    n_pos = assignment.n_positive
    n_neg = assignment.n_negative
    pos_sum = 0.0
    neg_sum = 0.0
    for i in range(n):
        if assignment.is_positive[i]:
            cls = int(target_classes[assignment.target_index[i]])
            if not 0 <= cls < k:
                raise ValueError(f"target class {cls} outside probability columns [0, {k})")
            pos_sum += (assignment.weight[i] + 1.0) * focal_loss(probs[i, cls], True, cfg)
            for c in range(k):
                if c != cls:
                    neg_sum += focal_loss(probs[i, c], False, cfg)
        else:
            for c in range(k):
                neg_sum += focal_loss(probs[i, c], False, cfg)
    return neg_sum / max(n_neg, 1) + pos_sum / max(n_pos, 1)


def _offset_fields(off) -> tuple[float, float, float, float, float]:
    if isinstance(off, BoxOffsets):
        return (off.tx, off.ty, off.tw, off.th, off.ttheta)
    vals = tuple(float(v) for v in off)
    if len(vals) != 5:
        raise ValueError(f"offsets must have 5 components, got {len(vals)}")
    return vals


def regression_loss(pred_offsets, target_offsets,
                    assignment: AssignmentResult,
                    cfg: LossConfig = LossConfig()) -> float:
    """Weighted smooth-L1 over the positives' five offset components."""
    if len(pred_offsets) != len(target_offsets):
        raise ValueError("pred and target offset sequences differ in length")
    if len(pred_offsets) != len(assignment.is_positive):
        raise ValueError("offset sequences must match anchor count")
    n_pos = assignment.n_positive
    total = 0.0
    for i in np.flatnonzero(assignment.is_positive):
        p = _offset_fields(pred_offsets[i])
        t = _offset_fields(target_offsets[i])
        total += assignment.weight[i] * sum(
            smooth_l1(pv - tv, cfg.smooth_l1_beta) for pv, tv in zip(p, t))
    return total / max(n_pos, 1)


def combined_loss(cls_value: float, refine_value: float, regress_value: float,
                  cfg: LossConfig = LossConfig()) -> float:
    """Multitask total: cls + lambda_refine * refine + lambda_regress * regress."""
    return cls_value + cfg.lambda_refine * refine_value + cfg.lambda_regress * regress_value
