"""Rotated NMS and PASCAL-style evaluation on a toy detection set."""

from obbkit import (
    ApVariant, DetectionRecord, GroundTruthRecord, RotatedBox, mean_ap,
    rotated_nms,
)

# two ships in one image, a cluster of raw detections around the first
gts = [
    GroundTruthRecord("scene", RotatedBox(30, 30, 24, 8, 0.4), 0),
    GroundTruthRecord("scene", RotatedBox(80, 60, 20, 8, -0.3), 0),
    GroundTruthRecord("scene", RotatedBox(55, 90, 18, 8, 0.1), 0, difficult=True),
]
raw = [
    DetectionRecord("scene", RotatedBox(30, 30, 24, 8, 0.4), 0, 0.95),
    DetectionRecord("scene", RotatedBox(31, 30, 24, 8, 0.42), 0, 0.90),  # duplicate
    DetectionRecord("scene", RotatedBox(29, 31, 25, 8, 0.38), 0, 0.85),  # duplicate
    DetectionRecord("scene", RotatedBox(80, 61, 20, 8, -0.28), 0, 0.80),
    DetectionRecord("scene", RotatedBox(55, 90, 18, 8, 0.1), 0, 0.70),   # hits a difficult gt
    DetectionRecord("scene", RotatedBox(10, 80, 16, 8, 0.0), 0, 0.60),   # background
]

kept = rotated_nms(raw, iou_threshold=0.5)
print(f"NMS: {len(raw)} detections -> {len(kept)} kept")
for d in kept:
    print(f"  score {d.score:.2f} at ({d.box.cx:.0f}, {d.box.cy:.0f})")

for variant in ApVariant:
    per_class, m = mean_ap(kept, gts, variant)
    print(f"\n{variant.value}: per-class {per_class}  mAP {m:.4f}")
print("\n(the difficult ground truth neither counts toward recall nor "
      "penalizes the detection that matched it)")
