"""Reading and writing detections, labels, and tracking results.

Two on-disk formats are supported:

* KITTI tracking labels: whitespace-delimited rows
  ``frame id type truncated occluded alpha x1 y1 x2 y2 h w l x y z ry [score]``
  with poses in the camera frame (x right, y down, z forward, box origin at
  the bottom face center, heading about the camera y axis).
* detection/result CSV with headers ``frame,class,x,y,z,yaw,l,w,h,score`` and
  ``frame,id,class,x,y,z,yaw,l,w,h,score``, already in the canonical frame.

Everything downstream of this module sees one canonical frame: right-handed,
z up, box center at the geometric cuboid center, yaw about z. This module owns
both directions of the KITTI conversion.
"""

import csv
import io as _stdio
import math
from dataclasses import dataclass
from typing import Iterable, TextIO

from .errors import ParseError, SchemaError
from .geometry import Box3D, normalize_angle

KITTI_CLASSES = (
    "Car",
    "Van",
    "Truck",
    "Pedestrian",
    "Person_sitting",
    "Cyclist",
    "Tram",
    "Misc",
    "DontCare",
)
DEFAULT_TRACKED_CLASSES = frozenset({"Car", "Pedestrian", "Cyclist"})
DONT_CARE = "DontCare"

DETECTION_CSV_COLUMNS = ("frame", "class", "x", "y", "z", "yaw", "l", "w", "h", "score")
RESULT_CSV_COLUMNS = ("frame", "id", "class", "x", "y", "z", "yaw", "l", "w", "h", "score")

# guards frame normalization (frames contiguous from 0) against corrupt indices
MAX_FRAME_INDEX = 1_000_000


@dataclass(frozen=True)
class KittiExtras:
    """Opaque KITTI row fields carried through for pass-through writing."""

    truncated: float = 0.0
    occluded: float = 0.0
    alpha: float | None = None
    bbox: tuple[float, float, float, float] = (-1.0, -1.0, -1.0, -1.0)


@dataclass(frozen=True)
class Detection3D:
    """One detector output (or labeled object) in the canonical frame.

    ``track_id`` is None for raw detections and set for ground-truth or
    hypothesis rows.
    """

    frame: int
    class_label: str
    box: Box3D
    score: float
    track_id: int | None = None
    extras: KittiExtras | None = None

    def __post_init__(self):
        if not 0 <= self.frame <= MAX_FRAME_INDEX:
            raise ValueError(f"frame index must lie in [0, {MAX_FRAME_INDEX}]")
        if not math.isfinite(self.score):
            raise ValueError("score must be finite")


@dataclass
class SequenceBundle:
    """Per-frame object lists for one sequence, contiguous from frame 0."""

    sequence_id: str
    frames: list[list[Detection3D]]
    dont_care: list[list[Detection3D]]

    @property
    def frame_count(self) -> int:
        return len(self.frames)

    def all_objects(self) -> Iterable[Detection3D]:
        for frame in self.frames:
            yield from frame


def _empty_bundle(sequence_id: str) -> SequenceBundle:
    return SequenceBundle(sequence_id, [], [])


def _bundle_from_rows(
    sequence_id: str,
    rows: list[Detection3D],
    dont_care: list[Detection3D],
    check_duplicates: bool,
) -> SequenceBundle:
    if not rows and not dont_care:
        return _empty_bundle(sequence_id)
    last = max((r.frame for r in rows), default=0)
    last = max(last, max((r.frame for r in dont_care), default=0))
    frames: list[list[Detection3D]] = [[] for _ in range(last + 1)]
    dc_frames: list[list[Detection3D]] = [[] for _ in range(last + 1)]
    seen: set[tuple[int, int]] = set()
    for row in rows:
        if check_duplicates and row.track_id is not None and row.track_id >= 0:
            key = (row.frame, row.track_id)
            if key in seen:
                raise ParseError(
                    f"duplicate track id {row.track_id} in frame {row.frame}"
                    f" of sequence {sequence_id!r}"
                )
            seen.add(key)
        frames[row.frame].append(row)
    for row in dont_care:
        dc_frames[row.frame].append(row)
    return SequenceBundle(sequence_id, frames, dc_frames)


# ---------------------------------------------------------------------------
# coordinate conversion


def kitti_to_canonical(x: float, y: float, z: float, ry: float, h: float):
    """Camera-frame bottom-center pose -> canonical geometric-center pose."""
    return z, -x, -y + 0.5 * h, normalize_angle(-ry - 0.5 * math.pi)


def canonical_to_kitti(cx: float, cy: float, cz: float, yaw: float, h: float):
    """Inverse of :func:`kitti_to_canonical`."""
    return -cy, 0.5 * h - cz, cx, normalize_angle(-yaw - 0.5 * math.pi)


def _read_text(source: str | TextIO) -> list[str]:
    if isinstance(source, str):
        return source.splitlines()
    return source.read().splitlines()


# ---------------------------------------------------------------------------
# KITTI tracking labels


def parse_kitti_labels(
    source: str | TextIO,
    sequence_id: str = "",
    tracked_classes: frozenset[str] | set[str] | None = DEFAULT_TRACKED_CLASSES,
    default_score: float = 1.0,
) -> SequenceBundle:
    """Parse KITTI tracking rows (ground truth or results) into canonical boxes.

    Rows of classes outside ``tracked_classes`` are dropped (pass None to keep
    every class); DontCare rows are retained separately. Missing score columns
    default to ``default_score`` (ground truth is certain by definition).
    """
    rows: list[Detection3D] = []
    dont_care: list[Detection3D] = []
    for line_no, line in enumerate(_read_text(source), start=1):
        if not line.strip():
            continue
        fields = line.split()
        if len(fields) not in (17, 18):
            raise ParseError(
                f"expected 17 or 18 columns, got {len(fields)}", line_no
            )
        try:
            frame = int(float(fields[0]))
            track_id = int(float(fields[1]))
            label = fields[2]
            truncated = float(fields[3])
            occluded = float(fields[4])
            alpha = float(fields[5])
            bbox = tuple(float(v) for v in fields[6:10])
            h, w, l = (float(v) for v in fields[10:13])
            x, y, z = (float(v) for v in fields[13:16])
            ry = float(fields[16])
            score = float(fields[17]) if len(fields) == 18 else default_score
        except ValueError as exc:
            raise ParseError(f"malformed value ({exc})", line_no) from None
        if frame < 0:
            raise ParseError(f"negative frame index {frame}", line_no)

        is_dont_care = label.lower() == DONT_CARE.lower()
        if not is_dont_care and tracked_classes is not None:
            if label not in tracked_classes:
                continue
        try:
            cx, cy, cz, yaw = kitti_to_canonical(x, y, z, ry, h)
            record = Detection3D(
                frame=frame,
                class_label=DONT_CARE if is_dont_care else label,
                box=Box3D(cx, cy, cz, yaw, l, w, h),
                score=score,
                track_id=track_id,
                extras=KittiExtras(truncated, occluded, alpha, bbox),
            )
        except ValueError as exc:
            raise ParseError(f"invalid row ({exc})", line_no) from None
        (dont_care if is_dont_care else rows).append(record)
    return _bundle_from_rows(sequence_id, rows, dont_care, check_duplicates=True)


# ---------------------------------------------------------------------------
# CSV detections / results


def _parse_csv(
    source: str | TextIO,
    sequence_id: str,
    columns: tuple[str, ...],
    with_id: bool,
) -> SequenceBundle:
    if isinstance(source, str):
        source = _stdio.StringIO(source)
    reader = csv.DictReader(source)
    header = reader.fieldnames or []
    for column in columns:
        if column not in header:
            raise SchemaError(f"missing column {column!r}")
    rows: list[Detection3D] = []
    for record in reader:
        line_no = reader.line_num
        try:
            frame = int(record["frame"])
            box = Box3D(
                float(record["x"]),
                float(record["y"]),
                float(record["z"]),
                float(record["yaw"]),
                float(record["l"]),
                float(record["w"]),
                float(record["h"]),
            )
            rows.append(
                Detection3D(
                    frame=frame,
                    class_label=record["class"],
                    box=box,
                    score=float(record["score"]),
                    track_id=int(record["id"]) if with_id else None,
                )
            )
        except (TypeError, ValueError) as exc:
            raise ParseError(f"malformed value ({exc})", line_no) from None
    return _bundle_from_rows(sequence_id, rows, [], check_duplicates=with_id)


def parse_detections_csv(source: str | TextIO, sequence_id: str = "") -> SequenceBundle:
    """Parse canonical-frame detections grouped per frame."""
    return _parse_csv(source, sequence_id, DETECTION_CSV_COLUMNS, with_id=False)


def parse_results_csv(source: str | TextIO, sequence_id: str = "") -> SequenceBundle:
    """Parse canonical-frame tracking results (identity-stamped boxes)."""
    return _parse_csv(source, sequence_id, RESULT_CSV_COLUMNS, with_id=True)


# ---------------------------------------------------------------------------
# result writing


def _sorted_rows(rows) -> list:
    return sorted(rows, key=lambda r: (r.frame, r.track_id if r.track_id is not None else -1))


def write_results_csv(rows) -> str:
    """Result rows as CSV, deterministically ordered by (frame, id)."""
    out = _stdio.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(RESULT_CSV_COLUMNS)
    for row in _sorted_rows(rows):
        b = row.box
        writer.writerow(
            [
                row.frame,
                row.track_id,
                row.class_label,
                f"{b.cx:.6f}",
                f"{b.cy:.6f}",
                f"{b.cz:.6f}",
                f"{b.yaw:.6f}",
                f"{b.length:.6f}",
                f"{b.width:.6f}",
                f"{b.height:.6f}",
                f"{row.score:.6f}",
            ]
        )
    return out.getvalue()


def write_detections_csv(rows) -> str:
    """Detection rows as CSV (no id column), ordered by frame."""
    out = _stdio.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(DETECTION_CSV_COLUMNS)
    for row in sorted(rows, key=lambda r: r.frame):
        b = row.box
        writer.writerow(
            [
                row.frame,
                row.class_label,
                f"{b.cx:.6f}",
                f"{b.cy:.6f}",
                f"{b.cz:.6f}",
                f"{b.yaw:.6f}",
                f"{b.length:.6f}",
                f"{b.width:.6f}",
                f"{b.height:.6f}",
                f"{row.score:.6f}",
            ]
        )
    return out.getvalue()


def write_results_kitti(rows) -> str:
    """Result rows in the 18-column KITTI format (canonical -> camera frame).

    KITTI fields with no canonical-frame counterpart come from the row's
    pass-through extras when present; otherwise the 2D bbox is a -1 sentinel
    and alpha is derived from the heading and viewing direction.
    """
    lines = []
    for row in _sorted_rows(rows):
        b = row.box
        x, y, z, ry = canonical_to_kitti(b.cx, b.cy, b.cz, b.yaw, b.height)
        extras = row.extras or KittiExtras()
        alpha = extras.alpha
        if alpha is None:
            alpha = normalize_angle(ry - math.atan2(x, z))
        bbox = extras.bbox
        lines.append(
            f"{row.frame} {row.track_id} {row.class_label}"
            f" {extras.truncated:.0f} {extras.occluded:.0f} {alpha:.6f}"
            f" {bbox[0]:.6f} {bbox[1]:.6f} {bbox[2]:.6f} {bbox[3]:.6f}"
            f" {b.height:.6f} {b.width:.6f} {b.length:.6f}"
            f" {x:.6f} {y:.6f} {z:.6f} {ry:.6f} {row.score:.6f}"
        )
    return "".join(line + "\n" for line in lines)
