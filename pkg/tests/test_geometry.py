import math

import numpy as np
import pytest

from obbkit.geometry import (
    ConvexPolygon, RotatedBox, convex_intersection, min_area_rect,
    polygon_area, rotated_iou, to_polygon,
)
from oracles import min_area_sweep, monte_carlo_iou, overlapping_pair, random_box


def vertex_set(poly, digits=9):
    return {(round(x, digits), round(y, digits)) for x, y in poly.vertices}


def assert_same_vertices(p1, p2, tol=1e-9):
    assert len(p1.vertices) == len(p2.vertices)
    for x, y in p1.vertices:
        assert min(math.hypot(x - u, y - v) for u, v in p2.vertices) <= tol


class TestRotatedBox:
    def test_rejects_nonpositive_sides(self):
        with pytest.raises(ValueError):
            RotatedBox(0, 0, 0.0, 1.0, 0.0)
        with pytest.raises(ValueError):
            RotatedBox(0, 0, 1.0, -2.0, 0.0)

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            RotatedBox(math.nan, 0, 1, 1, 0)
        with pytest.raises(ValueError):
            RotatedBox(0, 0, math.inf, 1, 0)

    def test_theta_normalized(self):
        assert RotatedBox(0, 0, 1, 1, math.pi).theta == pytest.approx(0.0, abs=1e-12)
        assert -math.pi / 2 <= RotatedBox(0, 0, 1, 1, 2.0).theta < math.pi / 2
        # the upper boundary folds onto the lower one
        assert RotatedBox(0, 0, 1, 1, math.pi / 2).theta == -math.pi / 2


class TestToPolygon:
    def test_axis_aligned_corners(self):
        poly = to_polygon(RotatedBox(0, 0, 2, 2, 0))
        assert vertex_set(poly) == {(1, 1), (-1, 1), (-1, -1), (1, -1)}

    def test_quarter_turn_square_same_vertices(self):
        a = to_polygon(RotatedBox(0, 0, 2, 2, 0))
        b = to_polygon(RotatedBox(0, 0, 2, 2, math.pi / 2))
        assert vertex_set(a) == vertex_set(b)

    def test_rotation_matrix_oracle(self):
        box = RotatedBox(1, 2, 4, 2, math.pi / 6)
        c, s = math.cos(math.pi / 6), math.sin(math.pi / 6)
        expected = set()
        for dx, dy in ((2, 1), (-2, 1), (-2, -1), (2, -1)):
            expected.add((round(1 + dx * c - dy * s, 9), round(2 + dx * s + dy * c, 9)))
        assert vertex_set(to_polygon(box)) == expected

    def test_centroid_matches_center(self, rng):
        for _ in range(50):
            box = random_box(rng)
            verts = to_polygon(box).vertices
            cx = sum(x for x, _ in verts) / 4
            cy = sum(y for _, y in verts) / 4
            scale = max(abs(box.cx), abs(box.cy), 1.0)
            assert abs(cx - box.cx) <= 1e-9 * scale
            assert abs(cy - box.cy) <= 1e-9 * scale

    def test_counterclockwise(self, rng):
        for _ in range(20):
            poly = to_polygon(random_box(rng))
            assert polygon_area(poly) > 0


class TestPolygonArea:
    def test_unit_square(self):
        sq = ConvexPolygon(((0, 0), (1, 0), (1, 1), (0, 1)))
        assert polygon_area(sq) == 1.0

    def test_collinear_is_zero(self):
        line = ConvexPolygon(((0, 0), (1, 1), (2, 2)))
        assert polygon_area(line) == 0.0

    def test_regular_hexagon(self):
        verts = tuple((math.cos(k * math.pi / 3), math.sin(k * math.pi / 3)) for k in range(6))
        assert polygon_area(ConvexPolygon(verts)) == pytest.approx(3 * math.sqrt(3) / 2, abs=1e-9)
        assert polygon_area(ConvexPolygon(verts)) == pytest.approx(2.5981, abs=1e-4)

    def test_rejects_too_few_vertices(self):
        with pytest.raises(ValueError):
            ConvexPolygon(((0, 0), (1, 1)))

    def test_rejects_nonconvex(self):
        with pytest.raises(ValueError):
            ConvexPolygon(((0, 0), (2, 0), (0.1, 0.1), (0, 2)))


class TestConvexIntersection:
    def test_identical_squares(self):
        sq = to_polygon(RotatedBox(0, 0, 2, 2, 0))
        inter = convex_intersection(sq, sq)
        assert inter is not None
        assert vertex_set(inter) == vertex_set(sq)

    def test_disjoint(self):
        a = to_polygon(RotatedBox(0, 0, 2, 2, 0))
        b = to_polygon(RotatedBox(10, 0, 2, 2, 0))
        assert convex_intersection(a, b) is None

    def test_square_vs_rotated_octagon(self, rng):
        a = to_polygon(RotatedBox(0, 0, 1, 1, 0))
        b = to_polygon(RotatedBox(0, 0, 1, 1, math.pi / 4))
        inter = convex_intersection(a, b)
        assert inter is not None
        assert len(inter.vertices) == 8
        analytic = 2 * (math.sqrt(2) - 1)
        assert polygon_area(inter) == pytest.approx(analytic, abs=1e-12)
        assert polygon_area(inter) == pytest.approx(0.82843, abs=1e-4)
        mc = monte_carlo_iou(RotatedBox(0, 0, 1, 1, 0), RotatedBox(0, 0, 1, 1, math.pi / 4),
                             200_000, rng)
        # cross-check through the IoU the sampled estimate implies
        assert abs(analytic / (2 - analytic) - mc) < 0.01


class TestRotatedIou:
    def test_identical(self):
        box = RotatedBox(3, 4, 5, 2, 0.3)
        assert rotated_iou(box, box) == 1.0

    def test_axis_aligned_shift(self):
        v = rotated_iou(RotatedBox(0, 0, 2, 2, 0), RotatedBox(1, 0, 2, 2, 0))
        assert v == pytest.approx(1 / 3, abs=1e-12)

    def test_rotated_square(self):
        v = rotated_iou(RotatedBox(0, 0, 1, 1, 0), RotatedBox(0, 0, 1, 1, math.pi / 4))
        assert v == pytest.approx(0.70711, abs=1e-4)

    def test_edge_contact_is_zero(self):
        assert rotated_iou(RotatedBox(0, 0, 2, 2, 0), RotatedBox(2, 0, 2, 2, 0)) == 0.0
        assert rotated_iou(RotatedBox(0, 0, 2, 2, 0), RotatedBox(2, 2, 2, 2, 0)) == 0.0

    def test_symmetry_exact(self, rng):
        for _ in range(300):
            a, b = overlapping_pair(rng)
            assert rotated_iou(a, b) == rotated_iou(b, a)

    def test_range_and_area_bounds(self, rng):
        for _ in range(200):
            a, b = overlapping_pair(rng)
            iou = rotated_iou(a, b)
            assert 0.0 <= iou <= 1.0
            inter = iou / (1 + iou) * (a.area + b.area)
            assert inter <= min(a.area, b.area) * (1 + 1e-9)
            union = a.area + b.area - inter
            assert union >= max(a.area, b.area) * (1 - 1e-9)

    def test_rigid_motion_invariance(self, rng):
        for _ in range(100):
            a, b = overlapping_pair(rng)
            base = rotated_iou(a, b)
            dx, dy, rot = rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(-math.pi, math.pi)
            c, s = math.cos(rot), math.sin(rot)

            def move(t):
                return RotatedBox(t.cx * c - t.cy * s + dx, t.cx * s + t.cy * c + dy,
                                  t.w, t.h, t.theta + rot)

            assert abs(rotated_iou(move(a), move(b)) - base) <= 1e-6

    def test_representation_equivalence(self, rng):
        for _ in range(100):
            a, b = overlapping_pair(rng)
            a_alt = RotatedBox(a.cx, a.cy, a.h, a.w, a.theta + math.pi / 2)
            assert_same_vertices(to_polygon(a), to_polygon(a_alt), tol=1e-9 * max(a.w, a.h, 1.0))
            assert abs(rotated_iou(a, b) - rotated_iou(a_alt, b)) <= 1e-9

    def test_monte_carlo_agreement(self, rng):
        bad = 0
        for _ in range(200):
            a, b = overlapping_pair(rng)
            if abs(rotated_iou(a, b) - monte_carlo_iou(a, b, 100_000, rng)) > 0.01:
                bad += 1
        assert bad <= 2


class TestMinAreaRect:
    def test_axis_aligned_readback(self):
        box = min_area_rect([(0, 0), (4, 0), (4, 2), (0, 2)])
        assert (box.cx, box.cy) == (2, 1)
        assert sorted((box.w, box.h)) == [2, 4]
        assert box.theta in (0.0, -math.pi / 2)

    def test_rotated_rectangle_readback(self):
        src = RotatedBox(5, -3, 6, 2, math.pi / 6)
        fit = min_area_rect(to_polygon(src).vertices)
        assert_same_vertices(to_polygon(fit), to_polygon(src), tol=1e-9)

    def test_non_rectangular_quad_vs_sweep(self):
        quad = [(0, 0), (2, 0), (2.2, 1), (0, 1)]
        fit = min_area_rect(quad)
        assert fit.area == pytest.approx(min_area_sweep(quad), rel=1e-3)
        # the fit must actually contain the points
        poly = to_polygon(fit)
        for x, y in quad:
            grown = RotatedBox(fit.cx, fit.cy, fit.w + 1e-6, fit.h + 1e-6, fit.theta)
            c, s = math.cos(grown.theta), math.sin(grown.theta)
            u = (x - grown.cx) * c + (y - grown.cy) * s
            v = -(x - grown.cx) * s + (y - grown.cy) * c
            assert abs(u) <= grown.w / 2 and abs(v) <= grown.h / 2

    def test_collinear_raises(self):
        with pytest.raises(ValueError):
            min_area_rect([(0, 0), (1, 1), (2, 2), (3, 3)])

    def test_random_rectangles_recovered(self, rng):
        for _ in range(50):
            src = random_box(rng, side_lo=2.0)
            fit = min_area_rect(to_polygon(src).vertices)
            assert fit.area == pytest.approx(src.area, rel=1e-9)
