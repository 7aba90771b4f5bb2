"""Frame-by-frame tracking: predict, associate, update, birth/death.

A :class:`Tracker` instance handles one object class and consumes detections
strictly in frame order. New trajectories start Tentative and are confirmed
after ``bir_min`` consecutive matches (counting the initiating detection); a
miss while Tentative deletes the trajectory immediately, and a Confirmed
trajectory survives up to ``age_max`` consecutive misses before deletion.

During the first ``bir_min - 1`` frames of a sequence, Tentative trajectories
are emitted too (flag-controlled); without this every sequence would open with
guaranteed misses. Unmatched-but-alive Confirmed trajectories can optionally
emit their predicted box ("coasting").
"""

import enum
import itertools
import statistics
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Mapping, Sequence

from . import kalman
from .assignment import AffinityMode, associate, build_affinity
from .errors import ConfigError
from .geometry import Box3D
from .io import Detection3D, KittiExtras, SequenceBundle


class TrackStatus(enum.Enum):
    TENTATIVE = "tentative"
    CONFIRMED = "confirmed"
    DEAD = "dead"


# class name -> (affinity mode, gate); distance gates are meters
DEFAULT_CLASS_GATES: dict[str, tuple[AffinityMode, float]] = {
    "Car": (AffinityMode.IOU, 0.01),
    "Pedestrian": (AffinityMode.NEG_DISTANCE, 1.0),
    "Cyclist": (AffinityMode.NEG_DISTANCE, 6.0),
}
FALLBACK_GATE = (AffinityMode.NEG_DISTANCE, 10.0)


@dataclass(frozen=True)
class TrackerConfig:
    mode: AffinityMode = AffinityMode.IOU
    gate: float = 0.01
    bir_min: int = 3
    age_max: int = 2
    use_angular_velocity: bool = False
    output_coasting: bool = False
    startup_emit_tentative: bool = True
    filter_params: kalman.FilterParams = kalman.FilterParams()

    def __post_init__(self):
        if self.bir_min < 1:
            raise ConfigError("bir_min must be at least 1")
        if self.age_max < 1:
            raise ConfigError("age_max must be at least 1")
        if self.mode is AffinityMode.IOU and not 0.0 <= self.gate <= 1.0:
            raise ConfigError("IoU gate must lie in [0, 1]")
        if self.mode is AffinityMode.NEG_DISTANCE and self.gate <= 0.0:
            raise ConfigError("distance gate must be positive meters")


def default_config_for_class(class_label: str, **overrides) -> TrackerConfig:
    """Per-class default gates; unknown classes get the distance fallback."""
    mode, gate = DEFAULT_CLASS_GATES.get(class_label, FALLBACK_GATE)
    return replace(TrackerConfig(mode=mode, gate=gate), **overrides) if overrides else TrackerConfig(mode=mode, gate=gate)


class IdGenerator:
    """Unique positive trajectory ids, never reused within a run."""

    def __init__(self):
        self._counter = itertools.count(1)

    def next_id(self) -> int:
        return next(self._counter)


@dataclass
class Trajectory:
    """Mutable per-object bookkeeping inside a tracker."""

    track_id: int
    class_label: str
    state: kalman.TrackState
    score: float
    hits: int = 1
    time_since_update: int = 0
    age: int = 1
    status: TrackStatus = TrackStatus.TENTATIVE
    history: list[tuple[int, Box3D, float]] = field(default_factory=list)
    extras: KittiExtras | None = None


@dataclass(frozen=True)
class TrackOutput:
    """One identity-stamped box emitted for one frame."""

    frame: int
    track_id: int
    class_label: str
    box: Box3D
    score: float
    status: TrackStatus
    coasting: bool = False
    extras: KittiExtras | None = None


class Tracker:
    """Single-class online tracker; not thread-safe, frame order is strict."""

    def __init__(
        self,
        config: TrackerConfig = TrackerConfig(),
        class_label: str | None = None,
        id_source: IdGenerator | None = None,
    ):
        self.config = config
        self.class_label = class_label
        self._ids = id_source or IdGenerator()
        self.active: list[Trajectory] = []
        self.finished: list[Trajectory] = []
        self._last_frame: int | None = None
        self._steps = 0

    def step(self, frame_index: int, detections: Sequence[Detection3D]) -> list[TrackOutput]:
        """Run one predict/associate/update/lifecycle cycle; returns emitted boxes."""
        if self._last_frame is not None and frame_index <= self._last_frame:
            raise ConfigError(
                f"frame indices must be strictly increasing (got {frame_index}"
                f" after {self._last_frame})"
            )
        if self.class_label is not None:
            for det in detections:
                if det.class_label != self.class_label:
                    raise ConfigError(
                        f"detection class {det.class_label!r} fed to"
                        f" {self.class_label!r} tracker"
                    )
        self._last_frame = frame_index
        self._steps += 1
        cfg = self.config
        fp = cfg.filter_params

        for traj in self.active:
            traj.state = kalman.predict(traj.state, fp)
            traj.age += 1

        affinity = build_affinity(
            [t.state.box for t in self.active],
            [d.box for d in detections],
            cfg.mode,
        )
        result = associate(affinity, cfg.gate)

        for i, j in result.matches:
            traj = self.active[i]
            det = detections[j]
            traj.state = kalman.update(traj.state, det.box, fp)
            traj.hits += 1
            traj.time_since_update = 0
            traj.score = det.score
            traj.extras = det.extras
            if traj.status is TrackStatus.TENTATIVE and traj.hits >= cfg.bir_min:
                traj.status = TrackStatus.CONFIRMED
            traj.history.append((frame_index, traj.state.box, det.score))

        for i in result.unmatched_trajectories:
            traj = self.active[i]
            traj.time_since_update += 1
            traj.hits = 0
            if traj.status is TrackStatus.TENTATIVE:
                traj.status = TrackStatus.DEAD
            elif traj.time_since_update > cfg.age_max:
                traj.status = TrackStatus.DEAD

        for j in result.unmatched_detections:
            det = detections[j]
            traj = Trajectory(
                track_id=self._ids.next_id(),
                class_label=det.class_label,
                state=kalman.init_state(det.box, fp, cfg.use_angular_velocity),
                score=det.score,
                extras=det.extras,
            )
            if cfg.bir_min == 1:
                traj.status = TrackStatus.CONFIRMED
            traj.history.append((frame_index, det.box, det.score))
            self.active.append(traj)

        outputs = []
        startup = cfg.startup_emit_tentative and self._steps <= cfg.bir_min - 1
        for traj in self.active:
            if traj.status is TrackStatus.DEAD:
                continue
            if traj.time_since_update == 0:
                if traj.status is TrackStatus.CONFIRMED or startup:
                    outputs.append(self._emit(frame_index, traj, coasting=False))
            elif (
                cfg.output_coasting
                and traj.status is TrackStatus.CONFIRMED
                and traj.time_since_update <= cfg.age_max
            ):
                outputs.append(self._emit(frame_index, traj, coasting=True))

        self.finished.extend(t for t in self.active if t.status is TrackStatus.DEAD)
        self.active = [t for t in self.active if t.status is not TrackStatus.DEAD]
        outputs.sort(key=lambda o: o.track_id)
        return outputs

    @staticmethod
    def _emit(frame_index: int, traj: Trajectory, coasting: bool) -> TrackOutput:
        return TrackOutput(
            frame=frame_index,
            track_id=traj.track_id,
            class_label=traj.class_label,
            box=traj.state.box,
            score=traj.score,
            status=traj.status,
            coasting=coasting,
            extras=traj.extras,
        )


@dataclass(frozen=True)
class FrameLog:
    frame: int
    seconds: float
    active_trajectories: int
    emitted: int


@dataclass
class SequenceRun:
    outputs: list[TrackOutput]
    frame_logs: list[FrameLog]
    seconds: float

    @property
    def frame_count(self) -> int:
        return len(self.frame_logs)

    @property
    def trajectory_count(self) -> int:
        return len({o.track_id for o in self.outputs})


ConfigResolver = Callable[[str], TrackerConfig]


def _resolver(configs) -> ConfigResolver:
    if configs is None:
        return default_config_for_class
    if isinstance(configs, TrackerConfig):
        return lambda label: configs
    if isinstance(configs, Mapping):
        return lambda label: configs.get(label) or default_config_for_class(label)
    raise ConfigError("configs must be a TrackerConfig, a mapping, or None")


def _frames_of(source) -> list[list[Detection3D]]:
    if isinstance(source, SequenceBundle):
        return source.frames
    return list(source)


def run_sequence(
    source: SequenceBundle | Iterable[list[Detection3D]],
    configs: TrackerConfig | Mapping[str, TrackerConfig] | None = None,
    classes: Sequence[str] | None = None,
) -> SequenceRun:
    """Track a whole detection sequence, one tracker per object class.

    Output is deterministic for identical input and online: rows for frame t
    never depend on later frames. Class trackers share one id generator, so
    ids are unique across classes.
    """
    frames = _frames_of(source)
    resolve = _resolver(configs)
    if classes is None:
        seen = {d.class_label for frame in frames for d in frame}
        classes = sorted(seen)
    ids = IdGenerator()
    trackers = {label: Tracker(resolve(label), label, ids) for label in classes}

    outputs: list[TrackOutput] = []
    frame_logs: list[FrameLog] = []
    started = time.perf_counter()
    for frame_index, detections in enumerate(frames):
        frame_started = time.perf_counter()
        emitted_before = len(outputs)
        per_class: dict[str, list[Detection3D]] = {label: [] for label in classes}
        for det in detections:
            if det.class_label in per_class:
                per_class[det.class_label].append(det)
        for label in classes:
            outputs.extend(trackers[label].step(frame_index, per_class[label]))
        frame_logs.append(
            FrameLog(
                frame=frame_index,
                seconds=time.perf_counter() - frame_started,
                active_trajectories=sum(len(t.active) for t in trackers.values()),
                emitted=len(outputs) - emitted_before,
            )
        )
    outputs.sort(key=lambda o: (o.frame, o.track_id))
    return SequenceRun(outputs, frame_logs, time.perf_counter() - started)


@dataclass(frozen=True)
class BenchmarkResult:
    frames: int
    repetitions: int
    seconds: list[float]
    fps: list[float]
    fps_median: float


def benchmark_sequence(
    source: SequenceBundle | Iterable[list[Detection3D]],
    configs: TrackerConfig | Mapping[str, TrackerConfig] | None = None,
    classes: Sequence[str] | None = None,
    repetitions: int = 3,
) -> BenchmarkResult:
    """Wall-clock throughput of the tracking stage alone (no parsing, no I/O)."""
    if repetitions < 1:
        raise ConfigError("repetitions must be at least 1")
    frames = _frames_of(source)
    resolve = _resolver(configs)
    if classes is None:
        seen = {d.class_label for frame in frames for d in frame}
        classes = sorted(seen)
    per_frame_class: list[dict[str, list[Detection3D]]] = []
    for detections in frames:
        split: dict[str, list[Detection3D]] = {label: [] for label in classes}
        for det in detections:
            if det.class_label in split:
                split[det.class_label].append(det)
        per_frame_class.append(split)

    seconds = []
    for _ in range(repetitions):
        ids = IdGenerator()
        trackers = {label: Tracker(resolve(label), label, ids) for label in classes}
        started = time.perf_counter()
        for frame_index, split in enumerate(per_frame_class):
            for label in classes:
                trackers[label].step(frame_index, split[label])
        seconds.append(time.perf_counter() - started)
    fps = [len(frames) / s if s > 0 else float("inf") for s in seconds]
    return BenchmarkResult(
        frames=len(frames),
        repetitions=repetitions,
        seconds=seconds,
        fps=fps,
        fps_median=statistics.median(fps),
    )
