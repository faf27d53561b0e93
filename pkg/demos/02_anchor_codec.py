"""One anchor per cell over a feature pyramid, and the offset codec."""

from obbkit import PyramidSpec, RotatedBox, decode_offsets, encode_offsets, generate_grid

spec = PyramidSpec.standard(800, 800)  # strides 8..128, square anchors 4x stride
grid = generate_grid(spec)
print(f"{len(grid)} anchors over a 800x800 image")
for lv in spec.levels:
    per_level = [b for b in grid if b.w == lv.base_side]
    print(f"  level {lv.level}: stride {lv.stride:>5.0f}, side {lv.base_side:>5.0f}, "
          f"{len(per_level)} anchors, first at ({per_level[0].cx}, {per_level[0].cy})")

# encode a rotated target against a horizontal anchor, then invert
anchor = grid[5050]
target = RotatedBox(anchor.cx + 3, anchor.cy - 2, 48.0, 14.0, 0.35)
off = encode_offsets(anchor, target)
print("\nanchor:", anchor)
print("target:", target)
print("offsets: tx=%.4f ty=%.4f tw=%.4f th=%.4f ttheta=%.4f"
      % (off.tx, off.ty, off.tw, off.th, off.ttheta))

back = decode_offsets(anchor, off)
print("decoded:", back)
print("round-trip error:",
      max(abs(back.cx - target.cx), abs(back.cy - target.cy),
          abs(back.w - target.w), abs(back.h - target.h),
          abs(back.theta - target.theta)))
