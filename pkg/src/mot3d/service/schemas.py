"""Pydantic request/response models for the tracking and evaluation service."""

from typing import Literal

from pydantic import BaseModel, Field

FileFormat = Literal["csv", "kitti"]


class SequenceFile(BaseModel):
    """One input file: the sequence name plus its raw text content."""

    name: str
    content: str
    format: FileFormat = "csv"


class FilterSettings(BaseModel):
    initial_observed_var: float | None = None
    initial_velocity_var: float | None = None
    process_observed_var: float | None = None
    process_velocity_var: float | None = None
    measurement_var: float | None = None
    orientation_correction: bool | None = None


class TrackerSettings(BaseModel):
    mode: Literal["iou", "distance"] | None = None
    gate: float | None = None
    bir_min: int | None = None
    age_max: int | None = None
    use_angular_velocity: bool | None = None
    output_coasting: bool | None = None
    startup_emit_tentative: bool | None = None
    filter: FilterSettings | None = None


class EvaluationSettings(BaseModel):
    criterion: Literal["iou", "distance"] | None = None
    thresholds: list[float] | None = None
    recall_steps: int | None = None
    ground_plane_distance: bool | None = None


class RunSettings(BaseModel):
    """Mirrors the JSON config file; request fields override file values."""

    classes: list[str] | None = None
    tracker: TrackerSettings | None = None
    per_class: dict[str, TrackerSettings] | None = None
    evaluation: EvaluationSettings | None = None


class TrackRequest(BaseModel):
    sequences: list[SequenceFile]
    config: RunSettings | None = None
    classes: list[str] | None = None
    output_formats: list[FileFormat] = Field(default_factory=lambda: ["csv"])
    include_frame_log: bool = True


class FrameLogEntry(BaseModel):
    frame: int
    seconds: float
    active_trajectories: int
    emitted: int


class SequenceTrackResult(BaseModel):
    name: str
    csv: str | None = None
    kitti: str | None = None
    frame_count: int
    trajectory_count: int
    output_rows: int
    seconds: float
    frame_log: list[FrameLogEntry] = Field(default_factory=list)


class TrackResponse(BaseModel):
    results: list[SequenceTrackResult]
    classes: list[str]
    seconds: float


class EvaluateRequest(BaseModel):
    ground_truth: list[SequenceFile]
    hypotheses: list[SequenceFile]
    config: RunSettings | None = None
    classes: list[str] | None = None
    criterion: Literal["iou", "distance"] | None = None
    thresholds: list[float] | None = None
    recall_steps: int | None = None


class EvaluateResponse(BaseModel):
    report: dict
    table: str
    warnings: list[str]


class CurvesRequest(EvaluateRequest):
    include_svg: bool = False
    svg_metrics: list[Literal["fp", "fn", "ids", "mota", "smota", "motp"]] = Field(
        default_factory=lambda: ["fp", "fn", "mota", "smota"]
    )


class ClassCurves(BaseModel):
    class_label: str
    criterion: str
    csv: str
    svg: dict[str, str] = Field(default_factory=dict)


class CurvesResponse(BaseModel):
    curves: list[ClassCurves]
    warnings: list[str]


class BenchRequest(BaseModel):
    sequences: list[SequenceFile]
    config: RunSettings | None = None
    classes: list[str] | None = None
    repetitions: int = 3


class BenchResponse(BaseModel):
    frames: int
    repetitions: int
    seconds_runs: list[float]
    fps_runs: list[float]
    fps_median: float


class HealthResponse(BaseModel):
    status: str
    version: str
