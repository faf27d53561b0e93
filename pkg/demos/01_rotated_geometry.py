"""Rotated-box geometry tour: polygons, clipping, IoU, rectangle fitting."""

import math

from obbkit import RotatedBox, convex_intersection, min_area_rect, polygon_area, rotated_iou, to_polygon

# A box is (cx, cy, w, h, theta); theta rotates the w-axis from image x.
box = RotatedBox(cx=4.0, cy=3.0, w=6.0, h=2.0, theta=math.pi / 6)
print("box:", box)
print("corners:")
for x, y in to_polygon(box).vertices:
    print(f"  ({x:8.4f}, {y:8.4f})")

# (w, h, theta) and (h, w, theta + pi/2) are the same point set
twin = RotatedBox(box.cx, box.cy, box.h, box.w, box.theta + math.pi / 2)
print("\nsame rectangle, swapped encoding:", twin)
print("IoU between the two encodings:", rotated_iou(box, twin))

# intersection of a square with its 45-degree twin is a regular octagon
a = RotatedBox(0, 0, 1, 1, 0)
b = RotatedBox(0, 0, 1, 1, math.pi / 4)
octagon = convex_intersection(to_polygon(a), to_polygon(b))
print("\noctagon vertices:", len(octagon.vertices))
print("octagon area:", polygon_area(octagon), "(analytic 2(sqrt(2)-1) =", 2 * (math.sqrt(2) - 1), ")")
print("IoU of the two squares:", rotated_iou(a, b), "(analytic 1/sqrt(2))")

# minimum-area enclosing rectangle of a slightly skewed quadrilateral
quad = [(0.0, 0.0), (2.0, 0.0), (2.2, 1.0), (0.0, 1.0)]
fit = min_area_rect(quad)
print("\nmin-area rectangle of", quad)
print("  ->", fit, "area", fit.area)
