"""FastAPI service wrapping the tracking and evaluation pipelines.

The service is stateless: every request carries its input files as text plus
optional configuration, so concurrent clients never share mutable state.
Errors surface as HTTP 400 with a ``kind`` of "config" or "data" so thin
clients can map them to distinct exit codes.
"""

import statistics
import time
from concurrent.futures import ThreadPoolExecutor

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..config import RunConfig, config_from_dict
from ..errors import ConfigError, DataError, Mot3DError
from ..io import (
    DEFAULT_TRACKED_CLASSES,
    KITTI_CLASSES,
    SequenceBundle,
    parse_detections_csv,
    parse_kitti_labels,
    parse_results_csv,
    write_results_csv,
    write_results_kitti,
)
from ..metrics import emit_curves, evaluate_report, report_to_dict
from ..tracker import benchmark_sequence, run_sequence
from . import schemas


def _run_config(settings: schemas.RunSettings | None) -> RunConfig:
    if settings is None:
        return RunConfig()
    return config_from_dict(settings.model_dump(exclude_none=True))


def _parse_sequence(file: schemas.SequenceFile, with_ids: bool, classes) -> SequenceBundle:
    if file.format == "kitti":
        tracked = frozenset(classes) if classes else DEFAULT_TRACKED_CLASSES
        return parse_kitti_labels(file.content, file.name, tracked_classes=tracked)
    if with_ids:
        return parse_results_csv(file.content, file.name)
    return parse_detections_csv(file.content, file.name)


def _unique_names(files: list[schemas.SequenceFile]) -> None:
    names = [f.name for f in files]
    if len(set(names)) != len(names):
        raise DataError("sequence names must be unique within a request")


def _resolve_classes(requested, config: RunConfig, bundles: list[SequenceBundle]) -> list[str]:
    classes = requested or config.classes
    present = sorted({obj.class_label for b in bundles for obj in b.all_objects()})
    if classes is None:
        return present
    known = set(present) | set(KITTI_CLASSES)
    unknown = [c for c in classes if c not in known]
    if unknown:
        raise ConfigError(
            f"unknown classes {unknown}; classes present in the input: {present or ['<none>']}"
        )
    return list(classes)


def _tracker_configs(config: RunConfig, classes: list[str]) -> dict:
    return {label: config.tracker_config_for(label) for label in classes}


def create_app() -> FastAPI:
    app = FastAPI(title="mot3d", version=__version__)

    @app.exception_handler(Mot3DError)
    async def _mot3d_error(request: Request, exc: Mot3DError):
        kind = "data" if isinstance(exc, DataError) else "config"
        if not isinstance(exc, (DataError, ConfigError)):
            kind = "error"
        return JSONResponse(
            status_code=400,
            content={"detail": {"kind": kind, "message": str(exc)}},
        )

    @app.get("/health", response_model=schemas.HealthResponse)
    def health() -> schemas.HealthResponse:
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.post("/track", response_model=schemas.TrackResponse)
    def track(request: schemas.TrackRequest) -> schemas.TrackResponse:
        config = _run_config(request.config)
        _unique_names(request.sequences)
        requested = request.classes or config.classes
        bundles = [
            _parse_sequence(f, with_ids=False, classes=requested)
            for f in request.sequences
        ]
        classes = _resolve_classes(request.classes, config, bundles)
        configs = _tracker_configs(config, classes)
        started = time.perf_counter()
        ordered = sorted(bundles, key=lambda b: b.sequence_id)
        # sequences are independent; a small worker pool, results kept in order
        with ThreadPoolExecutor(max_workers=min(4, max(1, len(ordered)))) as pool:
            runs = list(pool.map(lambda b: run_sequence(b, configs, classes), ordered))
        results = []
        for bundle, run in zip(ordered, runs):
            result = schemas.SequenceTrackResult(
                name=bundle.sequence_id,
                frame_count=run.frame_count,
                trajectory_count=run.trajectory_count,
                output_rows=len(run.outputs),
                seconds=run.seconds,
            )
            if "csv" in request.output_formats:
                result.csv = write_results_csv(run.outputs)
            if "kitti" in request.output_formats:
                result.kitti = write_results_kitti(run.outputs)
            if request.include_frame_log:
                result.frame_log = [
                    schemas.FrameLogEntry(
                        frame=log.frame,
                        seconds=log.seconds,
                        active_trajectories=log.active_trajectories,
                        emitted=log.emitted,
                    )
                    for log in run.frame_logs
                ]
            results.append(result)
        return schemas.TrackResponse(
            results=results,
            classes=classes,
            seconds=time.perf_counter() - started,
        )

    def _evaluation_inputs(request: schemas.EvaluateRequest):
        config = _run_config(request.config)
        if request.criterion is not None:
            config.criterion_kind = request.criterion
        if request.thresholds is not None:
            if not request.thresholds:
                raise ConfigError("thresholds must be non-empty when provided")
            config.criterion_thresholds = list(request.thresholds)
        if request.recall_steps is not None:
            if request.recall_steps < 1:
                raise ConfigError("recall_steps must be at least 1")
            config.recall_steps = request.recall_steps
        requested = request.classes or config.classes
        _unique_names(request.ground_truth)
        _unique_names(request.hypotheses)
        gt = [
            _parse_sequence(f, with_ids=True, classes=requested)
            for f in request.ground_truth
        ]
        hyp = [
            _parse_sequence(f, with_ids=True, classes=requested)
            for f in request.hypotheses
        ]
        classes = requested or sorted(
            {obj.class_label for b in gt for obj in b.all_objects()}
        )
        return config, gt, hyp, list(classes)

    @app.post("/evaluate", response_model=schemas.EvaluateResponse)
    def evaluate(request: schemas.EvaluateRequest) -> schemas.EvaluateResponse:
        config, gt, hyp, classes = _evaluation_inputs(request)
        report = evaluate_report(gt, hyp, classes, config.criteria(), config.recall_steps)
        return schemas.EvaluateResponse(
            report=report_to_dict(report),
            table=report.render_table(),
            warnings=report.warnings,
        )

    @app.post("/curves", response_model=schemas.CurvesResponse)
    def curves(request: schemas.CurvesRequest) -> schemas.CurvesResponse:
        config, gt, hyp, classes = _evaluation_inputs(request)
        report = evaluate_report(gt, hyp, classes, config.criteria(), config.recall_steps)
        out = []
        for row in report.rows:
            table = emit_curves(row.sweep)
            svg = {}
            if request.include_svg:
                svg = {metric: table.to_svg(metric) for metric in request.svg_metrics}
            out.append(
                schemas.ClassCurves(
                    class_label=row.class_label,
                    criterion=row.criterion.label(),
                    csv=table.to_csv(),
                    svg=svg,
                )
            )
        return schemas.CurvesResponse(curves=out, warnings=report.warnings)

    @app.post("/bench", response_model=schemas.BenchResponse)
    def bench(request: schemas.BenchRequest) -> schemas.BenchResponse:
        if request.repetitions < 1:
            raise ConfigError("repetitions must be at least 1")
        config = _run_config(request.config)
        _unique_names(request.sequences)
        requested = request.classes or config.classes
        bundles = [
            _parse_sequence(f, with_ids=False, classes=requested)
            for f in request.sequences
        ]
        classes = _resolve_classes(request.classes, config, bundles)
        configs = _tracker_configs(config, classes)
        results = [
            benchmark_sequence(bundle, configs, classes, request.repetitions)
            for bundle in sorted(bundles, key=lambda b: b.sequence_id)
        ]
        total_frames = sum(r.frames for r in results)
        seconds_runs = [
            sum(r.seconds[rep] for r in results) for rep in range(request.repetitions)
        ]
        fps_runs = [
            total_frames / s if s > 0 and total_frames else 0.0 for s in seconds_runs
        ]
        return schemas.BenchResponse(
            frames=total_frames,
            repetitions=request.repetitions,
            seconds_runs=seconds_runs,
            fps_runs=fps_runs,
            fps_median=statistics.median(fps_runs) if fps_runs else 0.0,
        )

    return app


app = create_app()
