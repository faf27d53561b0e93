"""One-anchor-per-cell grids over a feature pyramid and the box offset codec.

The codec maps (anchor, target) pairs to regression offsets
    tx = (x - xa) / wa      ty = (y - ya) / ha
    tw = log(w / wa)        th = log(h / ha)
    tt = tan(theta - theta_a)
and back.  Angle deltas are wrapped into [-pi/2, pi/2) before the tangent;
the parameterization is singular at +/-pi/2, so callers comparing against
other conventions should keep deltas away from the boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .geometry import RotatedBox, _normalize_angle


@dataclass(frozen=True)
class PyramidLevel:
    """A pyramid level: cell stride in pixels and the square anchor side."""

    level: int
    stride: float
    base_side: float


@dataclass(frozen=True)
class PyramidSpec:
    """Image extent plus the ordered pyramid levels (one anchor shape each)."""

    width: int
    height: int
    levels: tuple[PyramidLevel, ...]

    def __post_init__(self):
        if self.width < 0 or self.height < 0:
            raise ValueError("image dimensions must be non-negative")
        object.__setattr__(self, "levels", tuple(self.levels))
        prev = 0.0
        for lv in self.levels:
            if lv.stride <= prev:
                raise ValueError("strides must be strictly increasing")
            if lv.base_side <= 0:
                raise ValueError("base side must be positive")
            prev = lv.stride

    @classmethod
    def standard(cls, width: int, height: int, levels=(3, 4, 5, 6, 7),
                 side_scale: float = 4.0) -> "PyramidSpec":
        """P3..P7-style pyramid: stride 2**k, anchor side = side_scale * stride."""
        return cls(width, height, tuple(
            PyramidLevel(k, float(2 ** k), side_scale * 2 ** k) for k in levels))


@dataclass(frozen=True)
class BoxOffsets:
    """Regression offsets (tx, ty, tw, th, ttheta); all finite."""

    tx: float
    ty: float
    tw: float
    th: float
    ttheta: float

    def __post_init__(self):
        for name in ("tx", "ty", "tw", "th", "ttheta"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"BoxOffsets.{name} must be finite")


def grid_shape(spec: PyramidSpec, level: PyramidLevel) -> tuple[int, int]:
    """(rows, cols) of anchor cells for one level; ceil so borders are covered."""
    if spec.width == 0 or spec.height == 0:
        return 0, 0
    return math.ceil(spec.height / level.stride), math.ceil(spec.width / level.stride)


def generate_grid(spec: PyramidSpec) -> list[RotatedBox]:
    """Square axis-aligned anchors, one per cell, level-major then row-major.

    Cell (i, j) of a level with stride s gets its anchor at
    ((i + 0.5) * s, (j + 0.5) * s).
    """
    anchors: list[RotatedBox] = []
    for lv in spec.levels:
        ny, nx = grid_shape(spec, lv)
        for j in range(ny):
            cy = (j + 0.5) * lv.stride
            for i in range(nx):
                anchors.append(RotatedBox((i + 0.5) * lv.stride, cy,
                                          lv.base_side, lv.base_side, 0.0))
    return anchors


def encode_offsets(anchor: RotatedBox, target: RotatedBox) -> BoxOffsets:
    """Offsets that regress `anchor` onto `target`."""
    dtheta = _normalize_angle(target.theta - anchor.theta)
    return BoxOffsets(
        tx=(target.cx - anchor.cx) / anchor.w,
        ty=(target.cy - anchor.cy) / anchor.h,
        tw=math.log(target.w / anchor.w),
        th=math.log(target.h / anchor.h),
        ttheta=math.tan(dtheta),
    )


def decode_offsets(anchor: RotatedBox, off: BoxOffsets) -> RotatedBox:
    """Algebraic inverse of encode_offsets."""
    return RotatedBox(
        cx=anchor.cx + off.tx * anchor.w,
        cy=anchor.cy + off.ty * anchor.h,
        w=anchor.w * math.exp(off.tw),
        h=anchor.h * math.exp(off.th),
        theta=anchor.theta + math.atan(off.ttheta),
    )
