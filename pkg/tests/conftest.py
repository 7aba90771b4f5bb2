"""Shared builders and independent oracles for the test suite."""

import itertools
import math

import numpy as np

from mot3d.geometry import Box3D
from mot3d.io import Detection3D, SequenceBundle


def box(cx=0.0, cy=0.0, cz=0.0, yaw=0.0, l=1.0, w=1.0, h=1.0) -> Box3D:
    return Box3D(cx, cy, cz, yaw, l, w, h)


def car(cx=0.0, cy=0.0, cz=0.0, yaw=0.0) -> Box3D:
    return Box3D(cx, cy, cz, yaw, 4.0, 2.0, 1.5)


def det(frame, b: Box3D, label="Car", score=0.9, track_id=None) -> Detection3D:
    return Detection3D(frame, label, b, score, track_id=track_id)


def bundle_from_rows(sequence_id: str, rows: list[Detection3D]) -> SequenceBundle:
    frame_count = max((r.frame for r in rows), default=-1) + 1
    frames = [[] for _ in range(frame_count)]
    for row in rows:
        frames[row.frame].append(row)
    return SequenceBundle(sequence_id, frames, [[] for _ in range(frame_count)])


def random_box(rng: np.random.Generator, spread=4.0) -> Box3D:
    return Box3D(
        cx=rng.uniform(-spread, spread),
        cy=rng.uniform(-spread, spread),
        cz=rng.uniform(-1.0, 1.0),
        yaw=rng.uniform(-math.pi, math.pi),
        length=rng.uniform(0.5, 5.0),
        width=rng.uniform(0.5, 5.0),
        height=rng.uniform(0.5, 3.0),
    )


# ---------------------------------------------------------------------------
# independent oracles


def monte_carlo_iou(a: Box3D, b: Box3D, samples: int, rng: np.random.Generator) -> float:
    """Sampling estimate of the 3D IoU, independent of the clipping code.

    ``samples`` uniform points total are evaluated, half inside each box
    (antithetic +/- pairs), and the intersection volume is the average of the
    two "fraction inside the other box" estimates. The local-to-local mapping
    is fused into one rotation so each sample costs a handful of flops.
    """

    def fraction_inside(source: Box3D, other: Box3D, count: int) -> float:
        # map source-local points into other-local coordinates directly
        delta = source.yaw - other.yaw
        c, s = math.cos(delta), math.sin(delta)
        co, so = math.cos(other.yaw), math.sin(other.yaw)
        ox = source.cx - other.cx
        oy = source.cy - other.cy
        tx = co * ox + so * oy
        ty = -so * ox + co * oy
        half = count // 2
        pts = rng.uniform(-0.5, 0.5, size=(half, 3)).astype(np.float32)
        pts = np.concatenate([pts, -pts])
        px = pts[:, 0] * np.float32(source.length)
        py = pts[:, 1] * np.float32(source.width)
        pz = pts[:, 2] * np.float32(source.height)
        lx = np.float32(c) * px - np.float32(s) * py + np.float32(tx)
        ly = np.float32(s) * px + np.float32(c) * py + np.float32(ty)
        lz = pz + np.float32(source.cz - other.cz)
        inside = (
            (np.abs(lx) <= np.float32(other.length / 2))
            & (np.abs(ly) <= np.float32(other.width / 2))
            & (np.abs(lz) <= np.float32(other.height / 2))
        )
        return float(np.mean(inside))

    per_direction = samples // 2
    inter = 0.5 * (
        fraction_inside(a, b, per_direction) * a.volume
        + fraction_inside(b, a, per_direction) * b.volume
    )
    union = a.volume + b.volume - inter
    return inter / union if union > 0 else 0.0


def brute_force_assignment_cost(cost: np.ndarray) -> float:
    """Exhaustive minimum total cost over all assignments of min(m, n) pairs."""
    m, n = cost.shape
    k = min(m, n)
    best = math.inf
    for rows in itertools.combinations(range(m), k):
        for cols in itertools.permutations(range(n), k):
            total = sum(cost[rows[i], cols[i]] for i in range(k))
            best = min(best, total)
    return best


def exhaustive_frame_match(gt, hyp, criterion, prev_match):
    """Enumeration oracle for per-frame matching: max match count first, then
    max total affinity with the same persistence preference as the matcher."""
    bonus = 1e-9
    feasible = {}
    for i, (gt_id, g) in enumerate(gt):
        for j, (hyp_id, h) in enumerate(hyp):
            q = criterion.quality(g, h)
            if q is not None:
                feasible[(i, j)] = q + (bonus if prev_match.get(gt_id) == hyp_id else 0.0)
    best_pairs, best_total = None, -math.inf
    gt_indices = list(range(len(gt)))
    for k in range(min(len(gt), len(hyp)), -1, -1):
        for rows in itertools.combinations(gt_indices, k):
            for cols in itertools.permutations(range(len(hyp)), k):
                if any((rows[i], cols[i]) not in feasible for i in range(k)):
                    continue
                total = sum(feasible[(rows[i], cols[i])] for i in range(k))
                if best_pairs is None or total > best_total:
                    best_total = total
                    best_pairs = [(rows[i], cols[i]) for i in range(k)]
        if best_pairs is not None:
            break  # k is the maximum feasible cardinality
    best_pairs = best_pairs or []
    pairs = [(gt[i][0], hyp[j][0]) for i, j in best_pairs]
    ids = sum(
        1 for gt_id, hyp_id in pairs
        if gt_id in prev_match and prev_match[gt_id] != hyp_id
    )
    return {
        "matched": len(pairs),
        "fp": len(hyp) - len(pairs),
        "fn": len(gt) - len(pairs),
        "ids": ids,
        "pairs": pairs,
    }
