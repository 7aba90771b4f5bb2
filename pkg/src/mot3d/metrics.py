"""Tracking evaluation directly in 3D space, with recall-integral summaries.

Per frame, ground truth and hypothesis boxes are matched by a Hungarian solve
that maximizes match count first and total affinity second (with a tiny bonus
toward keeping the previous frame's correspondence); pairs must pass the
matching criterion (3D IoU above a threshold, or planar center distance below
one). FP/FN/IDS/FRAG follow CLEAR-MOT counting.

Because CLEAR metrics ignore the confidence of tracked objects, the evaluator
additionally sweeps 40 operating points across recall: trajectories are ranked
by their mean per-frame score, thresholds realizing each target recall are
selected, and MOTA/MOTP/sMOTA at those points average into AMOTA, AMOTP and
sAMOTA. MOTA at an operating point can never exceed the recall achieved there,
which caps plain AMOTA near 50%; the scaled variant removes that ceiling by
discounting the unavoidable misses and rescaling to the reachable ground
truth, then clamping to [0, 1].
"""

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .assignment import hungarian
from .errors import ConfigError, DataError, UndefinedMetricError
from .geometry import Box3D, center_distance, iou_3d
from .io import SequenceBundle

DEFAULT_RECALL_STEPS = 40

# Preference toward repeating the previous frame's gt->hyp pairing; only flips
# assignments whose total affinities tie within this margin.
_PERSISTENCE_BONUS = 1e-9
_RECALL_EPS = 1e-9


@dataclass(frozen=True)
class MatchingCriterion:
    """Successful-match test: kind "iou" (>= threshold) or "distance" (<= meters)."""

    kind: str
    threshold: float
    ground_plane_distance: bool = True

    def __post_init__(self):
        if self.kind not in ("iou", "distance"):
            raise ConfigError(f"unknown matching criterion {self.kind!r}")
        if self.kind == "iou" and not 0.0 < self.threshold <= 1.0:
            raise ConfigError("IoU_thres must lie in (0, 1]")
        if self.kind == "distance" and self.threshold <= 0.0:
            raise ConfigError("Dist_thres must be positive meters")

    def quality(self, gt_box: Box3D, hyp_box: Box3D) -> float | None:
        """Affinity in [0, 1] for pairs passing the criterion, else None.

        In distance mode the affinity is 1 - d/Dist_thres so that "higher is
        better" holds in both modes; it is also what MOTP averages.
        """
        if self.kind == "iou":
            value = iou_3d(gt_box, hyp_box)
            return value if value >= self.threshold else None
        dist = center_distance(gt_box, hyp_box, self.ground_plane_distance)
        if dist > self.threshold:
            return None
        return 1.0 - dist / self.threshold

    def label(self) -> str:
        if self.kind == "iou":
            return f"IoU_thres={self.threshold:g}"
        return f"Dist_thres={self.threshold:g}"


# ---------------------------------------------------------------------------
# evaluation inputs

GtFrame = list[tuple[int, Box3D]]
HypFrame = list[tuple[int, Box3D]]


@dataclass
class GroundTruthSet:
    """Annotated boxes of one class: sequences -> frames -> (gt id, box)."""

    sequences: list[list[GtFrame]]
    num_gt: int

    @classmethod
    def from_bundles(cls, bundles: Sequence[SequenceBundle], class_label: str) -> "GroundTruthSet":
        sequences = []
        total = 0
        for bundle in bundles:
            frames: list[GtFrame] = []
            for objects in bundle.frames:
                frame = [
                    (obj.track_id, obj.box)
                    for obj in objects
                    if obj.class_label == class_label and obj.track_id is not None
                ]
                total += len(frame)
                frames.append(frame)
            sequences.append(frames)
        return cls(sequences, total)


@dataclass
class HypothesisSet:
    """Tracker output boxes of one class, with recomputed trajectory confidence.

    A trajectory's confidence is the mean of its per-frame scores; input
    confidences are never trusted as-is.
    """

    sequences: list[list[HypFrame]]
    confidences: dict[tuple[int, int], float]

    @classmethod
    def from_bundles(cls, bundles: Sequence[SequenceBundle], class_label: str) -> "HypothesisSet":
        sequences = []
        score_sums: dict[tuple[int, int], list[float]] = {}
        for seq_index, bundle in enumerate(bundles):
            frames: list[HypFrame] = []
            for objects in bundle.frames:
                frame = []
                for obj in objects:
                    if obj.class_label != class_label or obj.track_id is None:
                        continue
                    frame.append((obj.track_id, obj.box))
                    score_sums.setdefault((seq_index, obj.track_id), []).append(obj.score)
                frames.append(frame)
            sequences.append(frames)
        confidences = {key: sum(vals) / len(vals) for key, vals in score_sums.items()}
        return cls(sequences, confidences)

    def distinct_confidences(self) -> list[float]:
        """Trajectory confidences, descending, duplicates removed."""
        return sorted(set(self.confidences.values()), reverse=True)

    def filtered(self, threshold: float) -> "HypothesisSet":
        """Keep only trajectories whose confidence is at least ``threshold``."""
        keep = {key for key, conf in self.confidences.items() if conf >= threshold}
        sequences = [
            [[(tid, box) for tid, box in frame if (s, tid) in keep] for frame in frames]
            for s, frames in enumerate(self.sequences)
        ]
        confidences = {key: conf for key, conf in self.confidences.items() if key in keep}
        return HypothesisSet(sequences, confidences)


# ---------------------------------------------------------------------------
# per-frame matching


@dataclass(frozen=True)
class FrameMatch:
    """Correspondence for one frame plus the CLEAR count increments."""

    pairs: list[tuple[int, int, float]]  # (gt id, hyp id, affinity)
    fp: int
    fn: int
    ids: int


def match_frame(
    gt: GtFrame,
    hyp: HypFrame,
    criterion: MatchingCriterion,
    prev_match: Mapping[int, int] | None = None,
) -> FrameMatch:
    """Optimally match one frame's boxes under the criterion.

    Maximizes the number of criterion-passing pairs first and their total
    affinity second, preferring to continue ``prev_match`` (the gt id -> hyp id
    correspondence from earlier frames) on ties. A matched gt whose hyp id
    differs from its previous match counts one identity switch.
    """
    prev_match = prev_match or {}
    pairs: list[tuple[int, int, float]] = []
    if len(gt) == 1 and hyp:
        gt_id, g = gt[0]
        expected = prev_match.get(gt_id)
        best = None
        for hyp_id, h in hyp:
            q = criterion.quality(g, h)
            if q is None:
                continue
            score = q + (_PERSISTENCE_BONUS if expected == hyp_id else 0.0)
            if best is None or score > best[0]:
                best = (score, hyp_id, q)
        if best is not None:
            pairs.append((gt_id, best[1], best[2]))
    elif gt and len(hyp) == 1:
        hyp_id, h = hyp[0]
        best = None
        for gt_id, g in gt:
            q = criterion.quality(g, h)
            if q is None:
                continue
            score = q + (_PERSISTENCE_BONUS if prev_match.get(gt_id) == hyp_id else 0.0)
            if best is None or score > best[0]:
                best = (score, gt_id, q)
        if best is not None:
            pairs.append((best[1], hyp_id, best[2]))
    elif gt and hyp:
        feasible = []
        row_degree = [0] * len(gt)
        col_degree = [0] * len(hyp)
        for i, (gt_id, g) in enumerate(gt):
            for j, (hyp_id, h) in enumerate(hyp):
                q = criterion.quality(g, h)
                if q is None:
                    continue
                bonus = _PERSISTENCE_BONUS if prev_match.get(gt_id) == hyp_id else 0.0
                feasible.append((i, j, q, bonus))
                row_degree[i] += 1
                col_degree[j] += 1
        if feasible and max(row_degree) <= 1 and max(col_degree) <= 1:
            # the feasible pairs already form the unique maximal matching
            pairs = [(gt[i][0], hyp[j][0], q) for i, j, q, _ in feasible]
        elif feasible:
            # feasible matches dominate affinity sums so match count is maximized
            base = 4.0 * (max(len(gt), len(hyp)) + 1.0)
            cost = np.zeros((len(gt), len(hyp)))
            quality = {}
            for i, j, q, bonus in feasible:
                cost[i, j] = -(base + q + bonus)
                quality[(i, j)] = q
            for i, j in hungarian(cost):
                if cost[i, j] < 0.0:
                    pairs.append((gt[i][0], hyp[j][0], quality[(i, j)]))
    ids = sum(
        1
        for gt_id, hyp_id, _ in pairs
        if gt_id in prev_match and prev_match[gt_id] != hyp_id
    )
    return FrameMatch(
        pairs=pairs,
        fp=len(hyp) - len(pairs),
        fn=len(gt) - len(pairs),
        ids=ids,
    )


# ---------------------------------------------------------------------------
# CLEAR metrics


@dataclass(frozen=True)
class ClearScore:
    """CLEAR metrics of one evaluation at one confidence threshold."""

    threshold: float | None
    recall: float
    precision: float
    f1: float
    mota: float
    motp: float
    smota: float
    tp: int
    fp: int
    fn: int
    ids: int
    frag: int
    num_gt: int


def scaled_mota(fp: int, fn: int, ids: int, recall: float, num_gt: int) -> float:
    """Recall-rescaled MOTA, clamped to [0, 1].

    The unavoidable misses at recall r ((1-r) * num_gt) are discounted from the
    error count and the remainder is normalized by the ground truth actually
    reachable at that recall (r * num_gt). The lower bound is clamped to zero;
    the upper clamp only engages for count combinations that are inconsistent
    with the stated recall.
    """
    if not 0.0 < recall <= 1.0:
        raise ValueError(f"recall must lie in (0, 1], got {recall}")
    if num_gt <= 0:
        raise ValueError("num_gt must be positive")
    value = 1.0 - (fp + fn + ids - (1.0 - recall) * num_gt) / (recall * num_gt)
    return min(1.0, max(0.0, value))


def _zero_score(num_gt: int) -> ClearScore:
    return ClearScore(
        threshold=None,
        recall=0.0,
        precision=0.0,
        f1=0.0,
        mota=0.0,
        motp=0.0,
        smota=0.0,
        tp=0,
        fp=0,
        fn=0,
        ids=0,
        frag=0,
        num_gt=num_gt,
    )


def clear_metrics(
    gt: GroundTruthSet,
    hyp: HypothesisSet,
    criterion: MatchingCriterion,
    threshold: float | None = None,
) -> ClearScore:
    """Accumulate per-frame matching over all sequences into CLEAR metrics.

    MOTP is the mean matched-pair affinity (mean 3D IoU, or 1 - d/Dist_thres
    in distance mode). FRAG counts tracked -> untracked -> tracked
    interruptions of a gt trajectory; IDS compares each new match against the
    gt's previous matched hyp id, gaps allowed.
    """
    if gt.num_gt <= 0:
        raise UndefinedMetricError("no ground truth objects for this class")
    tp = fp = fn = ids = frag = 0
    quality_sum = 0.0
    for seq_index, gt_frames in enumerate(gt.sequences):
        hyp_frames = hyp.sequences[seq_index] if seq_index < len(hyp.sequences) else []
        last_match: dict[int, int] = {}
        tracked_runs: dict[int, list[bool]] = {}
        frame_count = max(len(gt_frames), len(hyp_frames))
        for f in range(frame_count):
            g = gt_frames[f] if f < len(gt_frames) else []
            h = hyp_frames[f] if f < len(hyp_frames) else []
            fm = match_frame(g, h, criterion, last_match)
            tp += len(fm.pairs)
            fp += fm.fp
            fn += fm.fn
            ids += fm.ids
            matched_gt = {gt_id for gt_id, _, _ in fm.pairs}
            for gt_id, _ in g:
                tracked_runs.setdefault(gt_id, []).append(gt_id in matched_gt)
            for gt_id, hyp_id, quality in fm.pairs:
                quality_sum += quality
                last_match[gt_id] = hyp_id
        for flags in tracked_runs.values():
            runs = sum(
                1 for k, flag in enumerate(flags) if flag and (k == 0 or not flags[k - 1])
            )
            frag += max(0, runs - 1)

    recall = tp / gt.num_gt
    precision = tp / (tp + fp) if tp + fp else 0.0
    f1 = 2.0 * precision * recall / (precision + recall) if precision + recall else 0.0
    mota = 1.0 - (fp + fn + ids) / gt.num_gt
    motp = quality_sum / tp if tp else 0.0
    smota = scaled_mota(fp, fn, ids, recall, gt.num_gt) if recall > 0.0 else 0.0
    return ClearScore(
        threshold=threshold,
        recall=recall,
        precision=precision,
        f1=f1,
        mota=mota,
        motp=motp,
        smota=smota,
        tp=tp,
        fp=fp,
        fn=fn,
        ids=ids,
        frag=frag,
        num_gt=gt.num_gt,
    )


# ---------------------------------------------------------------------------
# recall sweep and integral metrics


@dataclass(frozen=True)
class SweepEntry:
    """One operating point of the confidence sweep."""

    target_recall: float
    threshold: float | None
    score: ClearScore
    achievable: bool


def recall_sweep(
    gt: GroundTruthSet,
    hyp: HypothesisSet,
    criterion: MatchingCriterion,
    steps: int = DEFAULT_RECALL_STEPS,
) -> list[SweepEntry]:
    """Evaluate at confidence thresholds realizing each target recall.

    Targets are k/steps for k = 1..steps. For each target, the selected
    threshold is the highest distinct trajectory confidence whose filtered
    hypothesis set achieves the smallest recall >= target; targets beyond the
    maximum achievable recall carry zeroed entries (MOTA and sMOTA both 0).
    """
    if steps < 1:
        raise ConfigError("steps must be at least 1")
    if gt.num_gt <= 0:
        raise UndefinedMetricError("no ground truth objects for this class")
    taus = hyp.distinct_confidences()
    cache: dict[int, ClearScore] = {}

    def evaluate(index: int) -> ClearScore:
        if index not in cache:
            cache[index] = clear_metrics(
                gt, hyp.filtered(taus[index]), criterion, threshold=taus[index]
            )
        return cache[index]

    max_recall = evaluate(len(taus) - 1).recall if taus else 0.0
    entries = []
    for k in range(1, steps + 1):
        target = k / steps
        if max_recall < target - _RECALL_EPS:
            entries.append(SweepEntry(target, None, _zero_score(gt.num_gt), False))
            continue
        lo, hi = 0, len(taus) - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if evaluate(mid).recall >= target - _RECALL_EPS:
                hi = mid
            else:
                lo = mid + 1
        entries.append(SweepEntry(target, taus[lo], evaluate(lo), True))
    return entries


@dataclass(frozen=True)
class IntegralMetrics:
    samota: float
    amota: float
    amotp: float


def integral_metrics(entries: Sequence[SweepEntry], steps: int = DEFAULT_RECALL_STEPS) -> IntegralMetrics:
    """Unweighted means over the sweep entries (zeros beyond max recall)."""
    if len(entries) != steps:
        raise ValueError(f"expected {steps} sweep entries, got {len(entries)}")
    samota = sum(e.score.smota for e in entries) / steps
    amota = sum(e.score.mota for e in entries) / steps
    amotp = sum(e.score.motp for e in entries) / steps
    return IntegralMetrics(samota=samota, amota=amota, amotp=amotp)


# ---------------------------------------------------------------------------
# curves


@dataclass(frozen=True)
class CurvePoint:
    recall: float
    threshold: float | None
    fp: int
    fn: int
    ids: int
    mota: float
    smota: float
    motp: float


@dataclass
class CurveTable:
    points: list[CurvePoint]

    CSV_HEADER = "recall,threshold,fp,fn,ids,mota,smota,motp"

    def to_csv(self) -> str:
        lines = [self.CSV_HEADER]
        for p in self.points:
            threshold = f"{p.threshold:.6f}" if p.threshold is not None else "nan"
            lines.append(
                f"{p.recall:.6f},{threshold},{p.fp},{p.fn},{p.ids},"
                f"{p.mota:.6f},{p.smota:.6f},{p.motp:.6f}"
            )
        return "\n".join(lines) + "\n"

    def to_svg(self, metric: str) -> str:
        values = [getattr(p, metric) for p in self.points]
        return _render_svg(
            [p.recall for p in self.points], [float(v) for v in values], metric
        )


def emit_curves(entries: Sequence[SweepEntry]) -> CurveTable:
    """Sweep entries as curve rows ordered by ascending target recall."""
    if not entries:
        raise ValueError("cannot emit curves from an empty sweep")
    points = [
        CurvePoint(
            recall=e.target_recall,
            threshold=e.threshold,
            fp=e.score.fp,
            fn=e.score.fn,
            ids=e.score.ids,
            mota=e.score.mota,
            smota=e.score.smota,
            motp=e.score.motp,
        )
        for e in sorted(entries, key=lambda e: e.target_recall)
    ]
    return CurveTable(points)


def _render_svg(xs: list[float], ys: list[float], label: str, width: int = 480, height: int = 320) -> str:
    margin = 48.0
    span_x = max(xs) - min(xs) or 1.0
    y_lo = min(0.0, min(ys))
    y_hi = max(ys) if max(ys) > y_lo else y_lo + 1.0
    span_y = y_hi - y_lo or 1.0

    def sx(x: float) -> float:
        return margin + (x - min(xs)) / span_x * (width - 2 * margin)

    def sy(y: float) -> float:
        return height - margin - (y - y_lo) / span_y * (height - 2 * margin)

    path = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys))
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">'
        f'<rect width="{width}" height="{height}" fill="white"/>'
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}"'
        f' y2="{height - margin}" stroke="black"/>'
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}"'
        f' stroke="black"/>'
        f'<polyline points="{path}" fill="none" stroke="steelblue" stroke-width="2"/>'
        f'<text x="{width / 2:.0f}" y="{height - 12}" text-anchor="middle"'
        f' font-size="14">recall</text>'
        f'<text x="16" y="{height / 2:.0f}" text-anchor="middle" font-size="14"'
        f' transform="rotate(-90 16 {height / 2:.0f})">{label}</text>'
        f'<text x="{margin:.0f}" y="{height - margin + 16:.0f}" font-size="11">{min(xs):g}</text>'
        f'<text x="{width - margin:.0f}" y="{height - margin + 16:.0f}" font-size="11"'
        f' text-anchor="end">{max(xs):g}</text>'
        f'<text x="{margin - 4:.0f}" y="{sy(y_hi) + 4:.0f}" font-size="11"'
        f' text-anchor="end">{y_hi:g}</text>'
        f'<text x="{margin - 4:.0f}" y="{sy(y_lo) + 4:.0f}" font-size="11"'
        f' text-anchor="end">{y_lo:g}</text>'
        "</svg>"
    )


# ---------------------------------------------------------------------------
# multi-class report


@dataclass(frozen=True)
class ClassReport:
    class_label: str
    criterion: MatchingCriterion
    num_gt: int
    samota: float
    amota: float
    amotp: float
    best: ClearScore
    sweep: list[SweepEntry]


@dataclass
class MetricsReport:
    """Evaluation rows per (class, criterion) plus per-criterion aggregates."""

    rows: list[ClassReport]
    aggregates: list[dict]
    warnings: list[str] = field(default_factory=list)
    recall_steps: int = DEFAULT_RECALL_STEPS

    def render_table(self) -> str:
        header = (
            f"{'Category':<12} {'Criterion':<18} {'sAMOTA':>8} {'AMOTA':>8}"
            f" {'AMOTP':>8} {'MOTA':>8} {'MOTP':>8} {'IDS':>6} {'FRAG':>6}"
        )
        lines = [header, "-" * len(header)]
        for row in self.rows:
            lines.append(
                f"{row.class_label:<12} {row.criterion.label():<18}"
                f" {100 * row.samota:>8.2f} {100 * row.amota:>8.2f}"
                f" {100 * row.amotp:>8.2f} {100 * row.best.mota:>8.2f}"
                f" {100 * row.best.motp:>8.2f} {row.best.ids:>6d} {row.best.frag:>6d}"
            )
        for agg in self.aggregates:
            lines.append(
                f"{'ALL':<12} {agg['criterion']:<18} {100 * agg['samota']:>8.2f}"
                f" {100 * agg['amota']:>8.2f} {100 * agg['amotp']:>8.2f}"
                f" {'':>8} {'':>8} {'':>6} {'':>6}"
            )
        for warning in self.warnings:
            lines.append(f"warning: {warning}")
        return "\n".join(lines) + "\n"


def _score_dict(score: ClearScore) -> dict:
    return {
        "threshold": score.threshold,
        "recall": score.recall,
        "precision": score.precision,
        "f1": score.f1,
        "mota": score.mota,
        "motp": score.motp,
        "smota": score.smota,
        "tp": score.tp,
        "fp": score.fp,
        "fn": score.fn,
        "ids": score.ids,
        "frag": score.frag,
        "num_gt": score.num_gt,
    }


def report_to_dict(report: MetricsReport) -> dict:
    return {
        "recall_steps": report.recall_steps,
        "rows": [
            {
                "class": row.class_label,
                "criterion": {"kind": row.criterion.kind, "threshold": row.criterion.threshold},
                "num_gt": row.num_gt,
                "samota": row.samota,
                "amota": row.amota,
                "amotp": row.amotp,
                "best": _score_dict(row.best),
                "sweep": [
                    {
                        "target_recall": e.target_recall,
                        "threshold": e.threshold,
                        "achievable": e.achievable,
                        "score": _score_dict(e.score),
                    }
                    for e in row.sweep
                ],
            }
            for row in report.rows
        ],
        "aggregates": report.aggregates,
        "warnings": report.warnings,
    }


def _pair_bundles(
    gt_bundles: Sequence[SequenceBundle],
    hyp_bundles: Sequence[SequenceBundle],
) -> tuple[list[SequenceBundle], list[SequenceBundle]]:
    # sequences pair by id; a single gt against a single hyp pairs directly
    if len(gt_bundles) == 1 and len(hyp_bundles) == 1:
        return list(gt_bundles), list(hyp_bundles)
    gt_by_id = {b.sequence_id: b for b in gt_bundles}
    if len(gt_by_id) != len(gt_bundles):
        raise DataError("duplicate ground-truth sequence ids")
    hyp_by_id = {b.sequence_id: b for b in hyp_bundles}
    unknown = sorted(set(hyp_by_id) - set(gt_by_id))
    if unknown:
        raise DataError(f"hypothesis sequences without ground truth: {unknown}")
    ordered = sorted(gt_by_id)
    empty = SequenceBundle("", [], [])
    return (
        [gt_by_id[sid] for sid in ordered],
        [hyp_by_id.get(sid, empty) for sid in ordered],
    )


def evaluate_class(
    gt_bundles: Sequence[SequenceBundle],
    hyp_bundles: Sequence[SequenceBundle],
    class_label: str,
    criterion: MatchingCriterion,
    steps: int = DEFAULT_RECALL_STEPS,
) -> ClassReport:
    """Full sweep evaluation of one class under one criterion."""
    gt_seqs, hyp_seqs = _pair_bundles(gt_bundles, hyp_bundles)
    gt = GroundTruthSet.from_bundles(gt_seqs, class_label)
    hyp = HypothesisSet.from_bundles(hyp_seqs, class_label)
    entries = recall_sweep(gt, hyp, criterion, steps)
    integrals = integral_metrics(entries, steps)
    best = entries[0].score
    for entry in entries[1:]:
        if entry.score.mota > best.mota:
            best = entry.score
    return ClassReport(
        class_label=class_label,
        criterion=criterion,
        num_gt=gt.num_gt,
        samota=integrals.samota,
        amota=integrals.amota,
        amotp=integrals.amotp,
        best=best,
        sweep=entries,
    )


def evaluate_report(
    gt_bundles: Sequence[SequenceBundle],
    hyp_bundles: Sequence[SequenceBundle],
    classes: Sequence[str],
    criteria: Sequence[MatchingCriterion],
    steps: int = DEFAULT_RECALL_STEPS,
) -> MetricsReport:
    """Evaluate every requested class under every criterion.

    Classes without any ground truth are skipped with a warning. Aggregates
    are unweighted means over the classes evaluated under each criterion.
    """
    rows: list[ClassReport] = []
    warnings: list[str] = []
    for criterion in criteria:
        for class_label in classes:
            try:
                rows.append(
                    evaluate_class(gt_bundles, hyp_bundles, class_label, criterion, steps)
                )
            except UndefinedMetricError:
                message = f"class {class_label!r} has no ground truth objects; skipped"
                if message not in warnings:
                    warnings.append(message)
    aggregates = []
    for criterion in criteria:
        members = [r for r in rows if r.criterion == criterion]
        if not members:
            continue
        aggregates.append(
            {
                "criterion": criterion.label(),
                "classes": [r.class_label for r in members],
                "samota": sum(r.samota for r in members) / len(members),
                "amota": sum(r.amota for r in members) / len(members),
                "amotp": sum(r.amotp for r in members) / len(members),
            }
        )
    return MetricsReport(rows=rows, aggregates=aggregates, warnings=warnings, recall_steps=steps)
