"""Oriented 3D boxes and the affinities between them.

Boxes live in a right-handed frame with z up. A box yaws about the vertical
axis through its geometric center, so its ground-plane footprint is a rotated
rectangle and the exact overlap of two boxes is (convex polygon intersection
of the two footprints) x (overlap of the vertical extents).
"""

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi

# Clipped footprints smaller than this are treated as empty, and points within
# this distance of a clip edge count as inside; avoids sign-flip jitter for
# touching boxes.
_MIN_INTERSECTION_AREA = 1e-12
_EDGE_EPS = 1e-9


def normalize_angle(theta: float) -> float:
    """Wrap an angle to the half-open interval (-pi, pi]."""
    if not math.isfinite(theta):
        raise ValueError(f"angle must be finite, got {theta!r}")
    wrapped = math.fmod(theta + math.pi, TWO_PI)
    if wrapped <= 0.0:
        wrapped += TWO_PI
    return wrapped - math.pi


@dataclass(frozen=True)
class Box3D:
    """Oriented cuboid: center (cx, cy, cz), heading yaw, extents length/width/height.

    length runs along the heading axis, width across it, height along z.
    Extents must be non-negative; zero-extent boxes are representable but
    degenerate (they have no volume and never overlap anything).
    """

    cx: float
    cy: float
    cz: float
    yaw: float
    length: float
    width: float
    height: float

    def __post_init__(self):
        if not (
            math.isfinite(self.cx)
            and math.isfinite(self.cy)
            and math.isfinite(self.cz)
            and math.isfinite(self.length)
            and math.isfinite(self.width)
            and math.isfinite(self.height)
        ):
            raise ValueError("box fields must be finite")
        if min(self.length, self.width, self.height) < 0.0:
            raise ValueError("box extents must be non-negative")
        object.__setattr__(self, "yaw", normalize_angle(self.yaw))

    @property
    def is_degenerate(self) -> bool:
        return self.length <= 0.0 or self.width <= 0.0 or self.height <= 0.0

    @property
    def volume(self) -> float:
        return self.length * self.width * self.height

    @property
    def z_min(self) -> float:
        return self.cz - 0.5 * self.height

    @property
    def z_max(self) -> float:
        return self.cz + 0.5 * self.height

    def to_array(self) -> np.ndarray:
        """(cx, cy, cz, yaw, length, width, height) as a float vector."""
        return np.array(
            [self.cx, self.cy, self.cz, self.yaw, self.length, self.width, self.height],
            dtype=float,
        )

    @classmethod
    def from_array(cls, values) -> "Box3D":
        cx, cy, cz, yaw, length, width, height = (float(v) for v in values)
        return cls(cx, cy, cz, yaw, length, width, height)


def bev_polygon(box: Box3D) -> np.ndarray:
    """Counter-clockwise footprint corners of the box in the ground plane, shape (4, 2)."""
    c = math.cos(box.yaw)
    s = math.sin(box.yaw)
    hl = 0.5 * box.length
    hw = 0.5 * box.width
    local = ((hl, hw), (-hl, hw), (-hl, -hw), (hl, -hw))
    return np.array(
        [(box.cx + c * x - s * y, box.cy + s * x + c * y) for x, y in local]
    )


def _clip_polygon(subject: np.ndarray, clip: np.ndarray) -> list[tuple[float, float]]:
    # Sutherland-Hodgman: clip one convex CCW polygon against another.
    output = [(float(p[0]), float(p[1])) for p in subject]
    n_clip = len(clip)
    for i in range(n_clip):
        ax, ay = clip[i - 1]
        bx, by = clip[i]
        ex, ey = bx - ax, by - ay
        # inside = left of (or within _EDGE_EPS meters of) the directed edge
        eps = _EDGE_EPS * math.hypot(ex, ey)
        points = output
        output = []
        if not points:
            break
        px, py = points[-1]
        p_in = ex * (py - ay) - ey * (px - ax) >= -eps
        for qx, qy in points:
            q_in = ex * (qy - ay) - ey * (qx - ax) >= -eps
            if q_in != p_in:
                dx, dy = qx - px, qy - py
                den = ex * dy - ey * dx
                if den != 0.0:
                    t = (ex * (ay - py) - ey * (ax - px)) / den
                    output.append((px + t * dx, py + t * dy))
                else:
                    # numerically parallel crossing; endpoint is within eps
                    output.append((qx, qy))
            if q_in:
                output.append((qx, qy))
            px, py, p_in = qx, qy, q_in
    return output


def _polygon_area(points: list[tuple[float, float]]) -> float:
    if len(points) < 3:
        return 0.0
    area = 0.0
    x0, y0 = points[-1]
    for x1, y1 in points:
        area += x0 * y1 - x1 * y0
        x0, y0 = x1, y1
    return 0.5 * abs(area)


def footprint_intersection_area(a: Box3D, b: Box3D) -> float:
    """Exact overlap area of the two ground-plane footprints."""
    clipped = _clip_polygon(bev_polygon(a), bev_polygon(b))
    area = _polygon_area(clipped)
    return area if area >= _MIN_INTERSECTION_AREA else 0.0


def _sort_key(box: Box3D):
    return (box.cx, box.cy, box.cz, box.yaw, box.length, box.width, box.height)


def iou_3d(a: Box3D, b: Box3D) -> float:
    """Volume intersection-over-union of two upright oriented boxes, in [0, 1].

    Degenerate (zero-volume) inputs yield 0. The operand order is canonicalized
    internally so the result is exactly symmetric.
    """
    if a.is_degenerate or b.is_degenerate:
        return 0.0
    if a == b:
        return 1.0
    if _sort_key(b) < _sort_key(a):
        a, b = b, a
    z_overlap = min(a.z_max, b.z_max) - max(a.z_min, b.z_min)
    if z_overlap <= 0.0:
        return 0.0
    # cheap reject: footprints cannot overlap beyond the circumradius sum
    reach = 0.5 * (math.hypot(a.length, a.width) + math.hypot(b.length, b.width))
    if (a.cx - b.cx) ** 2 + (a.cy - b.cy) ** 2 > reach * reach:
        return 0.0
    inter = footprint_intersection_area(a, b) * z_overlap
    if inter <= 0.0:
        return 0.0
    union = a.volume + b.volume - inter
    if union <= 0.0:
        return 0.0
    return min(inter / union, 1.0)


def center_distance(a: Box3D, b: Box3D, ground_plane: bool = True) -> float:
    """Euclidean distance between box centers, planar (default) or full 3D."""
    dx = a.cx - b.cx
    dy = a.cy - b.cy
    if ground_plane:
        return math.hypot(dx, dy)
    return math.sqrt(dx * dx + dy * dy + (a.cz - b.cz) ** 2)
