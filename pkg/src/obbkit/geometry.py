"""Exact rotated-rectangle geometry: polygon conversion, convex clipping, IoU.

Boxes are (cx, cy, w, h, theta) with theta in radians, measured as the
rotation of the box's w-axis from the image x-axis and stored normalized to
[-pi/2, pi/2).  A box therefore has two equivalent encodings: (w, h, theta)
and (h, w, theta + pi/2) describe the same point set, and every operation in
this module treats them identically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# Relative tolerance for collinearity / containment decisions, scaled by the
# largest dimension involved.  Keeps clipping stable for touching edges.
REL_TOL = 1e-9

Point = tuple[float, float]


def _normalize_angle(theta: float) -> float:
    """Wrap an angle to [-pi/2, pi/2) modulo pi."""
    t = math.remainder(theta, math.pi)
    if t >= math.pi / 2:
        t -= math.pi
    return t


@dataclass(frozen=True)
class RotatedBox:
    """Oriented rectangle: center (cx, cy), size (w, h), rotation theta."""

    cx: float
    cy: float
    w: float
    h: float
    theta: float = 0.0

    def __post_init__(self):
        for name in ("cx", "cy", "w", "h", "theta"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"RotatedBox.{name} must be finite, got {v!r}")
            object.__setattr__(self, name, v)
        if self.w <= 0 or self.h <= 0:
            raise ValueError(f"RotatedBox sides must be positive, got w={self.w}, h={self.h}")
        object.__setattr__(self, "theta", _normalize_angle(self.theta))

    @property
    def area(self) -> float:
        return self.w * self.h

    def corners(self) -> tuple[Point, Point, Point, Point]:
        """Counterclockwise corners, starting at the (+w/2, +h/2) corner."""
        c, s = math.cos(self.theta), math.sin(self.theta)
        hw, hh = 0.5 * self.w, 0.5 * self.h
        cx, cy = self.cx, self.cy
        return (
            (cx + hw * c - hh * s, cy + hw * s + hh * c),
            (cx - hw * c - hh * s, cy - hw * s + hh * c),
            (cx - hw * c + hh * s, cy - hw * s - hh * c),
            (cx + hw * c + hh * s, cy + hw * s - hh * c),
        )


@dataclass(frozen=True)
class ConvexPolygon:
    """Convex polygon with counterclockwise vertices (signed area >= 0)."""

    vertices: tuple[Point, ...]

    def __post_init__(self):
        verts = tuple((float(x), float(y)) for x, y in self.vertices)
        if len(verts) < 3:
            raise ValueError(f"polygon needs >= 3 vertices, got {len(verts)}")
        object.__setattr__(self, "vertices", verts)
        if _signed_area(verts) < 0:
            raise ValueError("polygon vertices must be counterclockwise")
        scale = max(max(abs(x), abs(y)) for x, y in verts) or 1.0
        tol = REL_TOL * scale * scale
        n = len(verts)
        for i in range(n):
            ax, ay = verts[i]
            bx, by = verts[(i + 1) % n]
            cx, cy = verts[(i + 2) % n]
            cross = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
            if cross < -tol:
                raise ValueError("polygon is not convex")

    @property
    def area(self) -> float:
        return polygon_area(self)


def _signed_area(verts) -> float:
    total = 0.0
    n = len(verts)
    for i in range(n):
        x0, y0 = verts[i]
        x1, y1 = verts[(i + 1) % n]
        total += x0 * y1 - x1 * y0
    return 0.5 * total


def to_polygon(box: RotatedBox) -> ConvexPolygon:
    """Box corners as a counterclockwise ConvexPolygon."""
    return ConvexPolygon(box.corners())


def polygon_area(p: ConvexPolygon) -> float:
    """Shoelace area (>= 0)."""
    return abs(_signed_area(p.vertices))


def _clip(subject: list[Point], clip: list[Point], eps: float) -> list[Point]:
    """Sutherland-Hodgman: clip a convex subject by a convex CCW polygon.

    `eps` is an absolute cross-product tolerance; points within it of a clip
    edge count as inside, so touching edges do not flicker.
    """
    output = subject
    cx1, cy1 = clip[-1]
    for cx2, cy2 in clip:
        if not output:
            break
        ex, ey = cx2 - cx1, cy2 - cy1
        inputs = output
        output = []
        sx, sy = inputs[-1]
        s_in = ex * (sy - cy1) - ey * (sx - cx1) >= -eps
        for px, py in inputs:
            p_in = ex * (py - cy1) - ey * (px - cx1) >= -eps
            if p_in != s_in:
                # segment crosses the clip line; intersect the two lines
                dcx, dcy = cx1 - cx2, cy1 - cy2
                dpx, dpy = sx - px, sy - py
                n1 = cx1 * cy2 - cy1 * cx2
                n2 = sx * py - sy * px
                den = dcx * dpy - dcy * dpx
                if den != 0.0:
                    inv = 1.0 / den
                    output.append(((n1 * dpx - n2 * dcx) * inv, (n1 * dpy - n2 * dcy) * inv))
            if p_in:
                output.append((px, py))
            sx, sy, s_in = px, py, p_in
        cx1, cy1 = cx2, cy2
    return output


def _dedupe(verts: list[Point], eps: float) -> list[Point]:
    out: list[Point] = []
    for x, y in verts:
        if out and abs(x - out[-1][0]) <= eps and abs(y - out[-1][1]) <= eps:
            continue
        out.append((x, y))
    while len(out) > 1 and abs(out[0][0] - out[-1][0]) <= eps and abs(out[0][1] - out[-1][1]) <= eps:
        out.pop()
    return out


def convex_intersection(a: ConvexPolygon, b: ConvexPolygon) -> ConvexPolygon | None:
    """Intersection polygon of two convex polygons, or None when empty.

    Touching configurations with zero area also report None.
    """
    scale = 1.0
    for x, y in a.vertices + b.vertices:
        scale = max(scale, abs(x), abs(y))
    eps = REL_TOL * scale * scale
    raw = _clip(list(a.vertices), list(b.vertices), eps)
    verts = _dedupe(raw, REL_TOL * scale)
    if len(verts) < 3:
        return None
    if abs(_signed_area(verts)) <= eps:
        return None
    if _signed_area(verts) < 0:
        verts.reverse()
    return ConvexPolygon(tuple(verts))


def rotated_iou(a: RotatedBox, b: RotatedBox) -> float:
    """Intersection over union of two rotated boxes, in [0, 1].

    Exactly symmetric: the operands are ordered canonically before
    clipping, so rotated_iou(a, b) == rotated_iou(b, a) bit for bit.
    All three areas come from the shoelace formula over the same corner
    coordinates, so identical boxes give exactly 1.
    """
    ka = (a.cx, a.cy, a.w, a.h, a.theta)
    kb = (b.cx, b.cy, b.w, b.h, b.theta)
    if kb < ka:
        a, b = b, a

    # cheap axis-aligned reject before clipping
    ra = 0.5 * math.hypot(a.w, a.h)
    rb = 0.5 * math.hypot(b.w, b.h)
    if abs(a.cx - b.cx) > ra + rb or abs(a.cy - b.cy) > ra + rb:
        return 0.0

    pa = list(a.corners())
    pb = list(b.corners())
    scale = max(a.w, a.h, b.w, b.h)
    eps = REL_TOL * scale * scale
    raw = _clip(pa, pb, eps)
    if len(raw) < 3:
        return 0.0
    inter = abs(_signed_area(raw))
    if inter <= eps:
        return 0.0
    union = abs(_signed_area(pa)) + abs(_signed_area(pb)) - inter
    if union <= 0.0:
        return 0.0
    return min(1.0, inter / union)


def _convex_hull(points: list[Point]) -> list[Point]:
    """Monotone-chain convex hull, counterclockwise, no collinear vertices."""
    pts = sorted(set(points))
    if len(pts) < 3:
        return pts

    def build(seq):
        hull: list[Point] = []
        for p in seq:
            while len(hull) >= 2:
                ox, oy = hull[-2]
                ax, ay = hull[-1]
                if (ax - ox) * (p[1] - oy) - (ay - oy) * (p[0] - ox) <= 0:
                    hull.pop()
                else:
                    break
            hull.append(p)
        return hull

    lower = build(pts)
    upper = build(reversed(pts))
    return lower[:-1] + upper[:-1]


def min_area_rect(points) -> RotatedBox:
    """Minimum-area enclosing rotated rectangle of >= 3 points.

    Runs rotating calipers over the convex hull: the optimum has one side
    collinear with a hull edge.  Raises ValueError for degenerate
    (collinear) input, which signals an invalid quadrilateral annotation.
    """
    pts = [(float(x), float(y)) for x, y in points]
    if len(pts) < 3:
        raise ValueError(f"need >= 3 points, got {len(pts)}")
    hull = _convex_hull(pts)
    if len(hull) < 3:
        raise ValueError("degenerate (collinear) points have no enclosing rectangle")

    best = None
    n = len(hull)
    for i in range(n):
        px, py = hull[i]
        qx, qy = hull[(i + 1) % n]
        ang = math.atan2(qy - py, qx - px)
        c, s = math.cos(ang), math.sin(ang)
        us = [x * c + y * s for x, y in hull]
        vs = [-x * s + y * c for x, y in hull]
        umin, umax = min(us), max(us)
        vmin, vmax = min(vs), max(vs)
        area = (umax - umin) * (vmax - vmin)
        if best is None or area < best[0]:
            best = (area, ang, umin, umax, vmin, vmax)

    _, ang, umin, umax, vmin, vmax = best
    c, s = math.cos(ang), math.sin(ang)
    uc, vc = 0.5 * (umin + umax), 0.5 * (vmin + vmax)
    return RotatedBox(
        cx=uc * c - vc * s,
        cy=uc * s + vc * c,
        w=umax - umin,
        h=vmax - vmin,
        theta=ang,
    )
