"""Loss building blocks and the matching-sensitive multitask objective."""

import numpy as np

from obbkit import (
    LossConfig, MatchingConfig, RotatedBox, assign_labels, classification_loss,
    combined_loss, encode_offsets, focal_loss, regression_loss, smooth_l1,
)

print("focal loss (alpha=0.25, gamma=2):")
for p in (0.5, 0.7, 0.9, 0.99):
    print(f"  p={p:4.2f}  positive={focal_loss(p, True):.6f}  negative={focal_loss(p, False):.6f}")

print("\nsmooth-L1 (beta=1/9):")
for x in (0.0, 0.05, 0.11, 0.5, 1.0):
    print(f"  |x|={x:4.2f}  ->  {smooth_l1(x):.5f}")

# a two-anchor scene: the weighted positive dominates the loss
target = RotatedBox(50, 50, 20, 10, 0)
anchors = [RotatedBox(50, 50, 20, 12, 0), RotatedBox(54, 50, 20, 10, 0)]
regressed = [RotatedBox(50, 50, 20, 10.5, 0), RotatedBox(52, 50, 20, 10, 0)]
assignment = assign_labels(anchors, regressed, [target], MatchingConfig.detection())
print("\nweights:", np.round(assignment.weight, 4))

probs = np.array([[0.85], [0.6]])
cls = classification_loss(probs, [0], assignment)
pred = [encode_offsets(a, r) for a, r in zip(anchors, regressed)]
tgt = [encode_offsets(a, target) for a in anchors]
reg = regression_loss(pred, tgt, assignment)
print(f"classification: {cls:.6f}")
print(f"regression:     {reg:.6f}")
print(f"combined (lambda1=lambda2=0.5): {combined_loss(cls, reg, reg):.6f}")

cfg = LossConfig(lambda_refine=1.0, lambda_regress=0.25)
print(f"rebalanced:     {combined_loss(cls, reg, reg, cfg):.6f}")
