"""Annotation parsing, image tiling bookkeeping, and the JSONL interchange formats.

Three line-delimited JSON formats glue the tools together (one object per
line, schema_version on every line, floats written with shortest
round-trip precision):

  annotations  {"schema_version": 1, "image_id", "width", "height",
                "objects": [{"box": [cx, cy, w, h, theta], "class", "difficult"}]}
  anchor dump  {"schema_version": 1, "image_id", "anchors": [[...5]], "regressed": [[...5]],
                "targets": [{"box", "class", "difficult"}], "scores": [...]?,
                "iou_in": [...]?, "iou_out": [...]?}
  detections   {"schema_version": 1, "image_id", "box": [...5], "class", "score"}

DOTA text annotations ("x1 y1 x2 y2 x3 y3 x4 y4 category difficult" per
line) are converted by fitting the minimum-area rotated rectangle to each
quadrilateral.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

from .evaluation import DetectionRecord, GroundTruthRecord
from .geometry import RotatedBox, convex_intersection, min_area_rect, polygon_area, to_polygon

SCHEMA_VERSION = 1

# the 15 DOTA-v1.0 categories, in the conventional order
DOTA_CLASSES = (
    "plane", "baseball-diamond", "bridge", "ground-track-field",
    "small-vehicle", "large-vehicle", "ship", "tennis-court",
    "basketball-court", "storage-tank", "soccer-ball-field", "roundabout",
    "harbor", "swimming-pool", "helicopter",
)


class ParseError(ValueError):
    """Malformed annotation text (message carries the line number)."""


class SchemaError(ValueError):
    """A JSONL record does not match its documented schema."""


@dataclass(frozen=True)
class TileWindow:
    """Square crop window at (x, y) with the given side length."""

    x: float
    y: float
    side: float


@dataclass
class ImageAnnotation:
    image_id: str
    width: int
    height: int
    objects: list[GroundTruthRecord] = field(default_factory=list)


@dataclass
class AnchorDumpEntry:
    """Per-image anchors with their regressed boxes and targets.

    iou_in / iou_out are optional cached per-anchor overlaps with the
    matched target; they are informational and always recomputable.
    """

    image_id: str
    anchors: list[RotatedBox]
    regressed: list[RotatedBox]
    targets: list[GroundTruthRecord]
    scores: list[float] | None = None
    iou_in: list[float] | None = None
    iou_out: list[float] | None = None

    def __post_init__(self):
        if len(self.anchors) != len(self.regressed):
            raise SchemaError(
                f"{self.image_id}: anchors ({len(self.anchors)}) and regressed "
                f"({len(self.regressed)}) differ in length")
        for name in ("scores", "iou_in", "iou_out"):
            vals = getattr(self, name)
            if vals is not None and len(vals) != len(self.anchors):
                raise SchemaError(f"{self.image_id}: {name} length must match anchors")

    @property
    def target_boxes(self) -> list[RotatedBox]:
        return [t.box for t in self.targets]


def parse_dota(text: str, image_id: str = "", width: int = 0, height: int = 0,
               class_names: Sequence[str] = DOTA_CLASSES) -> ImageAnnotation:
    """Parse one DOTA annotation file's contents.

    Header lines (imagesource/gsd) and blanks are tolerated.  Each object
    line must carry 8 corner coordinates, a known category, and a difficult
    flag; quadrilaterals are replaced by their minimum-area rotated box.
    """
    lookup = {name: idx for idx, name in enumerate(class_names)}
    ann = ImageAnnotation(image_id=image_id, width=width, height=height)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith(("imagesource", "gsd", "#")):
            continue
        tokens = line.split()
        if len(tokens) != 10:
            raise ParseError(f"line {lineno}: expected 10 fields "
                             f"(8 coordinates, category, difficult), got {len(tokens)}")
        try:
            coords = [float(t) for t in tokens[:8]]
        except ValueError as exc:
            raise ParseError(f"line {lineno}: bad coordinate: {exc}") from None
        category = tokens[8]
        if category not in lookup:
            raise ParseError(f"line {lineno}: unknown category {category!r}; "
                             f"known: {', '.join(class_names)}")
        try:
            difficult = bool(int(tokens[9]))
        except ValueError:
            raise ParseError(f"line {lineno}: difficult flag must be an integer, "
                             f"got {tokens[9]!r}") from None
        quad = list(zip(coords[0::2], coords[1::2]))
        try:
            box = min_area_rect(quad)
        except ValueError as exc:
            raise ParseError(f"line {lineno}: invalid quadrilateral: {exc}") from None
        ann.objects.append(GroundTruthRecord(
            image_id=image_id, box=box, class_id=lookup[category], difficult=difficult))
    _warn_outside(ann)
    return ann


def _warn_outside(ann: ImageAnnotation) -> None:
    if ann.width <= 0 or ann.height <= 0:
        return
    for rec in ann.objects:
        margin = 0.5 * math.hypot(rec.box.w, rec.box.h)
        if (rec.box.cx < -margin or rec.box.cx > ann.width + margin
                or rec.box.cy < -margin or rec.box.cy > ann.height + margin):
            warnings.warn(f"{ann.image_id}: box centered at "
                          f"({rec.box.cx:.1f}, {rec.box.cy:.1f}) lies outside the "
                          f"{ann.width}x{ann.height} image", stacklevel=2)


def tile_windows(width: int, height: int, side: int = 800, stride: int = 200) -> list[TileWindow]:
    """Sliding windows covering the image; edge windows are clamped inward.

    Origins advance by `stride`; a window that would overshoot is moved back
    so it ends exactly at the image edge, and duplicates are dropped.
    """
    if side <= 0 or stride <= 0:
        raise ValueError("side and stride must be positive")
    if width <= 0 or height <= 0:
        raise ValueError("image dimensions must be positive")

    def origins(extent: int) -> list[int]:
        out: list[int] = []
        pos = 0
        while True:
            if pos + side >= extent:
                last = max(0, extent - side)
                if not out or out[-1] != last:
                    out.append(last)
                return out
            out.append(pos)
            pos += stride

    return [TileWindow(float(x), float(y), float(side))
            for y in origins(height) for x in origins(width)]


def clip_to_window(objects: Sequence[GroundTruthRecord], window: TileWindow,
                   keep_fraction: float = 0.5) -> list[GroundTruthRecord]:
    """Keep boxes with >= keep_fraction of their area inside the window.

    Kept boxes are translated to window coordinates; their size and angle
    are never altered.
    """
    if not 0.0 <= keep_fraction <= 1.0:
        raise ValueError("keep_fraction must be in [0, 1]")
    win_poly = to_polygon(RotatedBox(window.x + window.side / 2, window.y + window.side / 2,
                                     window.side, window.side, 0.0))
    kept: list[GroundTruthRecord] = []
    for rec in objects:
        inter = convex_intersection(to_polygon(rec.box), win_poly)
        frac = polygon_area(inter) / rec.box.area if inter is not None else 0.0
        if frac >= keep_fraction:
            kept.append(GroundTruthRecord(
                image_id=rec.image_id,
                box=RotatedBox(rec.box.cx - window.x, rec.box.cy - window.y,
                               rec.box.w, rec.box.h, rec.box.theta),
                class_id=rec.class_id,
                difficult=rec.difficult,
            ))
    return kept


def untile_detections(dets: Sequence[DetectionRecord], window: TileWindow,
                      image_id: str | None = None) -> list[DetectionRecord]:
    """Translate window-local detections back to original image coordinates."""
    return [DetectionRecord(
        image_id=image_id if image_id is not None else d.image_id,
        box=RotatedBox(d.box.cx + window.x, d.box.cy + window.y,
                       d.box.w, d.box.h, d.box.theta),
        class_id=d.class_id,
        score=d.score,
    ) for d in dets]


# ---------------------------------------------------------------------------
# JSONL serialization

def _box_list(box: RotatedBox) -> list[float]:
    return [box.cx, box.cy, box.w, box.h, box.theta]


def _box_from(vals, where: str) -> RotatedBox:
    if not isinstance(vals, (list, tuple)) or len(vals) != 5:
        raise SchemaError(f"{where}: box must be a 5-element [cx, cy, w, h, theta] list")
    try:
        return RotatedBox(*(float(v) for v in vals))
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{where}: invalid box: {exc}") from None


def _target_obj(rec: GroundTruthRecord) -> dict:
    return {"box": _box_list(rec.box), "class": rec.class_id, "difficult": rec.difficult}


def _target_from(obj, image_id: str, where: str) -> GroundTruthRecord:
    if not isinstance(obj, dict) or "box" not in obj or "class" not in obj:
        raise SchemaError(f"{where}: target must be an object with box and class")
    return GroundTruthRecord(
        image_id=image_id,
        box=_box_from(obj["box"], where),
        class_id=int(obj["class"]),
        difficult=bool(obj.get("difficult", False)),
    )


def _require(obj: dict, key: str, where: str):
    if key not in obj:
        raise SchemaError(f"{where}: missing required field {key!r}")
    return obj[key]


def _records(lines: Iterable[str], what: str):
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{what} line {lineno}: not valid JSON: {exc}") from None
        if not isinstance(obj, dict):
            raise SchemaError(f"{what} line {lineno}: expected a JSON object")
        yield f"{what} line {lineno}", obj


def _open_lines(source) -> Iterable[str]:
    if hasattr(source, "read"):
        return source
    with open(source, "r", encoding="utf-8") as fh:
        return fh.readlines()


def write_dump(entries: Iterable[AnchorDumpEntry], sink) -> None:
    """Write an anchor dump as line-delimited JSON."""
    own = not hasattr(sink, "write")
    fh: TextIO = open(sink, "w", encoding="utf-8", newline="\n") if own else sink
    try:
        for e in entries:
            obj = {
                "schema_version": SCHEMA_VERSION,
                "image_id": e.image_id,
                "anchors": [_box_list(b) for b in e.anchors],
                "regressed": [_box_list(b) for b in e.regressed],
                "targets": [_target_obj(t) for t in e.targets],
            }
            if e.scores is not None:
                obj["scores"] = [float(s) for s in e.scores]
            if e.iou_in is not None:
                obj["iou_in"] = [float(v) for v in e.iou_in]
            if e.iou_out is not None:
                obj["iou_out"] = [float(v) for v in e.iou_out]
            fh.write(json.dumps(obj) + "\n")
    finally:
        if own:
            fh.close()


def read_dump(source) -> list[AnchorDumpEntry]:
    """Read a line-delimited anchor dump, validating the schema."""
    entries: list[AnchorDumpEntry] = []
    for where, obj in _records(_open_lines(source), "dump"):
        image_id = str(_require(obj, "image_id", where))
        anchors = [_box_from(b, where) for b in _require(obj, "anchors", where)]
        regressed = [_box_from(b, where) for b in _require(obj, "regressed", where)]
        targets = [_target_from(t, image_id, where) for t in _require(obj, "targets", where)]
        entries.append(AnchorDumpEntry(
            image_id=image_id,
            anchors=anchors,
            regressed=regressed,
            targets=targets,
            scores=[float(s) for s in obj["scores"]] if "scores" in obj else None,
            iou_in=[float(v) for v in obj["iou_in"]] if "iou_in" in obj else None,
            iou_out=[float(v) for v in obj["iou_out"]] if "iou_out" in obj else None,
        ))
    return entries


def write_annotations(anns: Iterable[ImageAnnotation], sink) -> None:
    own = not hasattr(sink, "write")
    fh: TextIO = open(sink, "w", encoding="utf-8", newline="\n") if own else sink
    try:
        for a in anns:
            fh.write(json.dumps({
                "schema_version": SCHEMA_VERSION,
                "image_id": a.image_id,
                "width": a.width,
                "height": a.height,
                "objects": [_target_obj(o) for o in a.objects],
            }) + "\n")
    finally:
        if own:
            fh.close()


def read_annotations(source) -> list[ImageAnnotation]:
    anns: list[ImageAnnotation] = []
    for where, obj in _records(_open_lines(source), "annotations"):
        image_id = str(_require(obj, "image_id", where))
        ann = ImageAnnotation(
            image_id=image_id,
            width=int(_require(obj, "width", where)),
            height=int(_require(obj, "height", where)),
            objects=[_target_from(t, image_id, where) for t in _require(obj, "objects", where)],
        )
        _warn_outside(ann)
        anns.append(ann)
    return anns


def write_detections(dets: Iterable[DetectionRecord], sink) -> None:
    own = not hasattr(sink, "write")
    fh: TextIO = open(sink, "w", encoding="utf-8", newline="\n") if own else sink
    try:
        for d in dets:
            fh.write(json.dumps({
                "schema_version": SCHEMA_VERSION,
                "image_id": d.image_id,
                "box": _box_list(d.box),
                "class": d.class_id,
                "score": d.score,
            }) + "\n")
    finally:
        if own:
            fh.close()


def read_detections(source) -> list[DetectionRecord]:
    dets: list[DetectionRecord] = []
    for where, obj in _records(_open_lines(source), "detections"):
        score = float(_require(obj, "score", where))
        if not 0.0 <= score <= 1.0:
            raise SchemaError(f"{where}: score must be in [0, 1], got {score}")
        dets.append(DetectionRecord(
            image_id=str(_require(obj, "image_id", where)),
            box=_box_from(_require(obj, "box", where), where),
            class_id=int(_require(obj, "class", where)),
            score=score,
        ))
    return dets


def read_boxes(source) -> list[RotatedBox]:
    """Read a plain-text box file: five numbers per line, '#' comments allowed."""
    boxes: list[RotatedBox] = []
    for lineno, raw in enumerate(_open_lines(source), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 5:
            raise ParseError(f"line {lineno}: expected 5 numbers (cx cy w h theta), "
                             f"got {len(tokens)} fields")
        try:
            boxes.append(RotatedBox(*(float(t) for t in tokens)))
        except ValueError as exc:
            raise ParseError(f"line {lineno}: {exc}") from None
    return boxes
