"""Affinity matrices and optimal detection-to-trajectory assignment.

The affinity between a predicted trajectory box and a detection box is either
their 3D IoU or the negated planar center distance. Assignment minimizes total
negated affinity globally, then a gate demotes weak pairs to unmatched, which
is deliberately done after the global solve rather than by pre-filtering.
"""

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geometry import Box3D, iou_3d


class AffinityMode(enum.Enum):
    IOU = "iou"
    NEG_DISTANCE = "distance"


@dataclass(frozen=True)
class AffinityMatrix:
    """rows = trajectories, cols = detections; values are unitless affinities."""

    values: np.ndarray
    mode: AffinityMode

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise ValueError("affinity matrix must be 2-dimensional")
        if values.size and not np.all(np.isfinite(values)):
            raise ValueError("affinity values must be finite")
        object.__setattr__(self, "values", values)

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class AssociationResult:
    """Four-way partition of trajectory and detection indices for one frame."""

    matches: list[tuple[int, int]]
    unmatched_trajectories: list[int]
    unmatched_detections: list[int]


def build_affinity(
    trajectories: Sequence[Box3D],
    detections: Sequence[Box3D],
    mode: AffinityMode = AffinityMode.IOU,
) -> AffinityMatrix:
    """Pairwise affinity of every (trajectory, detection) box pair."""
    m, n = len(trajectories), len(detections)
    values = np.zeros((m, n))
    if m == 0 or n == 0:
        return AffinityMatrix(values, mode)
    ta = np.array([(b.cx, b.cy, b.cz, b.length, b.width, b.height) for b in trajectories])
    da = np.array([(b.cx, b.cy, b.cz, b.length, b.width, b.height) for b in detections])
    dx = ta[:, 0, None] - da[None, :, 0]
    dy = ta[:, 1, None] - da[None, :, 1]
    if mode is AffinityMode.NEG_DISTANCE:
        values = -np.hypot(dx, dy)
    else:
        # exact IoU only for pairs that can overlap at all: planar centers
        # within the circumradius sum and vertical extents intersecting
        reach = 0.5 * (
            np.hypot(ta[:, 3], ta[:, 4])[:, None] + np.hypot(da[:, 3], da[:, 4])[None, :]
        )
        z_overlap = np.minimum(
            ta[:, 2, None] + 0.5 * ta[:, 5, None], da[None, :, 2] + 0.5 * da[None, :, 5]
        ) - np.maximum(
            ta[:, 2, None] - 0.5 * ta[:, 5, None], da[None, :, 2] - 0.5 * da[None, :, 5]
        )
        candidates = (dx * dx + dy * dy <= reach * reach) & (z_overlap > 0.0)
        for i, j in zip(*np.nonzero(candidates)):
            values[i, j] = iou_3d(trajectories[i], detections[j])
    return AffinityMatrix(values, mode)


def hungarian(cost) -> list[tuple[int, int]]:
    """Minimum-cost assignment of min(rows, cols) pairs on a rectangular matrix.

    Classical potential-based augmenting-path solver on a square matrix;
    rectangular inputs are padded with a cost strictly larger than any real
    entry and padded pairs discarded. Deterministic: rows are processed in
    ascending order and among equal-reduced-cost columns the lowest index is
    taken, so equal-cost optima resolve to the lexicographically first
    assignment discovered. Pairs are returned sorted by row index.
    """
    cost = np.asarray(cost, dtype=float)
    if cost.ndim != 2:
        raise ValueError("cost matrix must be 2-dimensional")
    m, n = cost.shape
    if m == 0 or n == 0:
        return []
    if not np.all(np.isfinite(cost)):
        raise ValueError("cost matrix entries must be finite")

    size = max(m, n)
    padded = np.full((size, size), cost.max() + 1.0)
    padded[:m, :n] = cost

    col_of_row = _solve_square(padded)
    pairs = [(i, int(col_of_row[i])) for i in range(m) if col_of_row[i] < n]
    return pairs


def _solve_square(cost: np.ndarray) -> np.ndarray:
    """Column assigned to each row for a square minimization problem."""
    n = cost.shape[0]
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    # row matched to each column; column n is the virtual start
    row_of_col = np.full(n + 1, -1, dtype=int)

    for i in range(n):
        row_of_col[n] = i
        j_cur = n
        min_to_col = np.full(n, np.inf)
        prev_col = np.full(n, -1, dtype=int)
        visited = np.zeros(n + 1, dtype=bool)
        while True:
            visited[j_cur] = True
            i_cur = row_of_col[j_cur]
            free = ~visited[:n]
            reduced = cost[i_cur, free] - u[i_cur] - v[:n][free]
            better = reduced < min_to_col[free]
            idx = np.flatnonzero(free)
            upd = idx[better]
            min_to_col[upd] = reduced[better]
            prev_col[upd] = j_cur
            # lowest column index wins among equal minima (np.argmin rule)
            j_next = idx[int(np.argmin(min_to_col[idx]))]
            delta = min_to_col[j_next]
            scanned = visited.copy()
            u[row_of_col[scanned]] += delta
            v[np.flatnonzero(scanned[:n])] -= delta
            min_to_col[~visited[:n]] -= delta
            j_cur = int(j_next)
            if row_of_col[j_cur] == -1:
                break
        # augment along the alternating path
        while j_cur != n:
            j_prev = int(prev_col[j_cur])
            row_of_col[j_cur] = row_of_col[j_prev]
            j_cur = j_prev

    col_of_row = np.empty(n, dtype=int)
    for j in range(n):
        col_of_row[row_of_col[j]] = j
    return col_of_row


def associate(affinity: AffinityMatrix, gate: float) -> AssociationResult:
    """Globally assign, then reject matches failing the gate.

    In IoU mode the gate is a minimum affinity (pairs with IoU < gate are
    rejected); in negated-distance mode it is a maximum distance (pairs
    farther than gate meters apart are rejected). Rejected pairs count as
    unmatched on both sides.
    """
    m, n = affinity.rows, affinity.cols
    if m == 0 or n == 0:
        return AssociationResult([], list(range(m)), list(range(n)))

    pairs = hungarian(-affinity.values)
    matches = []
    for i, j in pairs:
        value = affinity.values[i, j]
        if affinity.mode is AffinityMode.IOU:
            keep = value >= gate
        else:
            keep = -value <= gate
        if keep:
            matches.append((i, j))

    matched_rows = {i for i, _ in matches}
    matched_cols = {j for _, j in matches}
    return AssociationResult(
        matches=matches,
        unmatched_trajectories=[i for i in range(m) if i not in matched_rows],
        unmatched_detections=[j for j in range(n) if j not in matched_cols],
    )
