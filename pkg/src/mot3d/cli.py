"""Command-line front end, a thin client of the tracking/evaluation service.

Commands assemble their input files into a request, send it over HTTP (to a
remote server given via --server / MOT3D_SERVER, or to the service mounted
in-process by default), and write whatever comes back. All domain logic lives
behind the service API.

Exit codes: 0 success, 1 usage/config error, 2 data error.
"""

import asyncio
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import click
import httpx

from .errors import ConfigError, DataError, Mot3DError

_INPUT_SUFFIXES = (".csv", ".txt")


@dataclass
class RunManifest:
    """Validated inputs of one command invocation, recorded into run logs."""

    inputs: list[Path]
    output_dir: Path | None
    config_path: Path | None
    classes: list[str] | None
    criterion: dict | None = None
    seed_free: bool = True  # the pipeline uses no randomness anywhere

    def to_dict(self) -> dict:
        return {
            "inputs": [str(p) for p in self.inputs],
            "output_dir": str(self.output_dir) if self.output_dir else None,
            "config": str(self.config_path) if self.config_path else None,
            "classes": self.classes,
            "criterion": self.criterion,
            "seed_free_deterministic": self.seed_free,
        }


def _collect_files(path_str: str, fmt: str) -> list[dict]:
    """A file, or every *.csv / *.txt in a directory, as request payload items."""
    path = Path(path_str)
    if not path.exists():
        raise ConfigError(f"input path does not exist: {path}")
    if path.is_file():
        files = [path]
    else:
        files = sorted(
            p for p in path.iterdir() if p.is_file() and p.suffix in _INPUT_SUFFIXES
        )
    return [
        {"name": p.stem, "content": p.read_text(encoding="utf-8"), "format": fmt}
        for p in files
    ]


def _load_config_payload(config_path: str | None) -> dict | None:
    if config_path is None:
        return None
    path = Path(config_path)
    if not path.is_file():
        raise ConfigError(f"config file does not exist: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    return data


def _post(server: str | None, path: str, payload: dict) -> dict:
    async def go():
        if server is None:
            from .service.app import create_app

            transport = httpx.ASGITransport(app=create_app())
            client = httpx.AsyncClient(
                transport=transport, base_url="http://mot3d.internal", timeout=None
            )
        else:
            client = httpx.AsyncClient(base_url=server, timeout=None)
        async with client:
            return await client.post(path, json=payload)

    try:
        response = asyncio.run(go())
    except httpx.HTTPError as exc:
        raise ConfigError(f"cannot reach service: {exc}") from None
    if response.status_code == 200:
        return response.json()
    detail = {}
    try:
        detail = response.json().get("detail", {})
    except ValueError:
        pass
    if isinstance(detail, dict) and detail.get("kind") == "data":
        raise DataError(detail.get("message", "invalid input data"))
    if isinstance(detail, dict) and "message" in detail:
        raise ConfigError(detail["message"])
    raise ConfigError(f"service returned HTTP {response.status_code}: {response.text[:200]}")


def _parse_classes(classes: str | None) -> list[str] | None:
    if classes is None:
        return None
    parsed = [c.strip() for c in classes.split(",") if c.strip()]
    if not parsed:
        raise ConfigError("--classes must name at least one class")
    return parsed


def _tracker_overrides(iou_min, dist_max, bir_min, age_max, angular_velocity, coasting) -> dict:
    tracker: dict = {}
    if iou_min is not None and dist_max is not None:
        raise ConfigError("--iou-min and --dist-max are mutually exclusive")
    if iou_min is not None:
        tracker["mode"] = "iou"
        tracker["gate"] = iou_min
    if dist_max is not None:
        tracker["mode"] = "distance"
        tracker["gate"] = dist_max
    if bir_min is not None:
        tracker["bir_min"] = bir_min
    if age_max is not None:
        tracker["age_max"] = age_max
    if angular_velocity is not None:
        tracker["use_angular_velocity"] = angular_velocity
    if coasting is not None:
        tracker["output_coasting"] = coasting
    return tracker


def _merge_config(config: dict | None, tracker_overrides: dict) -> dict | None:
    if not tracker_overrides:
        return config
    merged = dict(config or {})
    section = dict(merged.get("tracker") or {})
    section.update(tracker_overrides)
    merged["tracker"] = section
    return merged


def _criterion_options(iou_thres, dist_thres) -> tuple[str | None, list[float] | None]:
    if iou_thres and dist_thres:
        raise ConfigError("--iou-thres and --dist-thres are mutually exclusive")
    if iou_thres:
        return "iou", list(iou_thres)
    if dist_thres:
        return "distance", list(dist_thres)
    return None, None


def _ensure_out_dir(out: str | None) -> Path | None:
    if out is None:
        return None
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


@click.group()
@click.option(
    "--server",
    envvar="MOT3D_SERVER",
    default=None,
    help="Service URL; by default the service runs in-process.",
)
@click.version_option(package_name="mot3d")
@click.pass_context
def cli(ctx: click.Context, server: str | None):
    """3D multi-object tracking and evaluation."""
    ctx.obj = {"server": server}


@cli.command()
@click.option("--detections", required=True, help="Detection file or directory.")
@click.option("--format", "fmt", type=click.Choice(["csv", "kitti"]), default="csv")
@click.option("--out", required=True, help="Output directory for result files.")
@click.option("--classes", default=None, help="Comma-separated class names.")
@click.option("--config", "config_path", default=None, help="JSON config file.")
@click.option("--iou-min", type=float, default=None, help="IoU association gate.")
@click.option("--dist-max", type=float, default=None, help="Distance association gate (m).")
@click.option("--bir-min", type=int, default=None, help="Consecutive matches before birth.")
@click.option("--age-max", type=int, default=None, help="Allowed consecutive misses.")
@click.option("--angular-velocity/--no-angular-velocity", default=None, help="Track yaw rate.")
@click.option("--coasting/--no-coasting", default=None, help="Emit predicted boxes on misses.")
@click.option(
    "--output-format",
    type=click.Choice(["csv", "kitti", "both"]),
    default="csv",
    show_default=True,
)
@click.pass_context
def track(ctx, detections, fmt, out, classes, config_path, iou_min, dist_max,
          bir_min, age_max, angular_velocity, coasting, output_format):
    """Turn per-frame detections into identity-stamped trajectories."""
    class_list = _parse_classes(classes)
    config = _merge_config(
        _load_config_payload(config_path),
        _tracker_overrides(iou_min, dist_max, bir_min, age_max, angular_velocity, coasting),
    )
    files = _collect_files(detections, fmt)
    out_dir = _ensure_out_dir(out)
    manifest = RunManifest(
        inputs=[Path(detections)],
        output_dir=out_dir,
        config_path=Path(config_path) if config_path else None,
        classes=class_list,
    )
    formats = ["csv", "kitti"] if output_format == "both" else [output_format]
    payload = {
        "sequences": files,
        "classes": class_list,
        "output_formats": formats,
        "include_frame_log": True,
    }
    if config:
        payload["config"] = config
    response = _post(ctx.obj["server"], "/track", payload)

    log = {"manifest": manifest.to_dict(), "classes": response["classes"], "sequences": []}
    for result in response["results"]:
        if result.get("csv") is not None:
            (out_dir / f"{result['name']}.csv").write_text(result["csv"], encoding="utf-8")
        if result.get("kitti") is not None:
            (out_dir / f"{result['name']}.txt").write_text(result["kitti"], encoding="utf-8")
        log["sequences"].append(
            {
                "name": result["name"],
                "frames": result["frame_count"],
                "trajectories": result["trajectory_count"],
                "output_rows": result["output_rows"],
                "seconds": result["seconds"],
                "frame_log": result.get("frame_log", []),
            }
        )
        click.echo(
            f"{result['name']}: {result['frame_count']} frames,"
            f" {result['trajectory_count']} trajectories,"
            f" {result['output_rows']} rows"
        )
    (out_dir / "track_log.json").write_text(
        json.dumps(log, indent=2) + "\n", encoding="utf-8"
    )


def _evaluation_payload(gt, gt_format, hyp, hyp_format, classes, config_path,
                        iou_thres, dist_thres, recall_steps) -> tuple[dict, RunManifest]:
    class_list = _parse_classes(classes)
    config = _load_config_payload(config_path)
    kind, thresholds = _criterion_options(iou_thres, dist_thres)
    payload = {
        "ground_truth": _collect_files(gt, gt_format),
        "hypotheses": _collect_files(hyp, hyp_format),
        "classes": class_list,
    }
    if config:
        payload["config"] = config
    if kind:
        payload["criterion"] = kind
        payload["thresholds"] = thresholds
    if recall_steps is not None:
        payload["recall_steps"] = recall_steps
    manifest = RunManifest(
        inputs=[Path(gt), Path(hyp)],
        output_dir=None,
        config_path=Path(config_path) if config_path else None,
        classes=class_list,
        criterion={"kind": kind, "thresholds": thresholds} if kind else None,
    )
    return payload, manifest


_EVAL_OPTIONS = [
    click.option("--gt", required=True, help="Ground-truth file or directory."),
    click.option("--gt-format", type=click.Choice(["csv", "kitti"]), default="kitti", show_default=True),
    click.option("--hyp", required=True, help="Tracking-result file or directory."),
    click.option("--hyp-format", type=click.Choice(["csv", "kitti"]), default="csv", show_default=True),
    click.option("--classes", default=None, help="Comma-separated class names."),
    click.option("--config", "config_path", default=None, help="JSON config file."),
    click.option("--iou-thres", type=float, multiple=True, help="3D IoU matching threshold(s)."),
    click.option("--dist-thres", type=float, multiple=True, help="Center-distance threshold(s), meters."),
    click.option("--recall-steps", type=int, default=None, help="Operating points for the sweep (default 40)."),
]


def _apply_options(options):
    def wrap(func):
        for option in reversed(options):
            func = option(func)
        return func
    return wrap


@cli.command()
@_apply_options(_EVAL_OPTIONS)
@click.option("--out", default=None, help="Directory for the JSON report.")
@click.pass_context
def evaluate(ctx, gt, gt_format, hyp, hyp_format, classes, config_path,
             iou_thres, dist_thres, recall_steps, out):
    """Score tracking results against ground truth in 3D space."""
    payload, manifest = _evaluation_payload(
        gt, gt_format, hyp, hyp_format, classes, config_path,
        iou_thres, dist_thres, recall_steps,
    )
    response = _post(ctx.obj["server"], "/evaluate", payload)
    click.echo(response["table"], nl=False)
    out_dir = _ensure_out_dir(out)
    if out_dir is not None:
        report = {"manifest": manifest.to_dict(), **response["report"]}
        (out_dir / "report.json").write_text(
            json.dumps(report, indent=2) + "\n", encoding="utf-8"
        )
        click.echo(f"report written to {out_dir / 'report.json'}")


@cli.command()
@_apply_options(_EVAL_OPTIONS)
@click.option("--out", required=True, help="Directory for curve CSV/SVG files.")
@click.option("--svg/--no-svg", default=False, show_default=True, help="Also render SVG charts.")
@click.pass_context
def curves(ctx, gt, gt_format, hyp, hyp_format, classes, config_path,
           iou_thres, dist_thres, recall_steps, out, svg):
    """Write recall-sweep curve tables (FP/FN/MOTA/sMOTA over recall)."""
    payload, _ = _evaluation_payload(
        gt, gt_format, hyp, hyp_format, classes, config_path,
        iou_thres, dist_thres, recall_steps,
    )
    payload["include_svg"] = svg
    response = _post(ctx.obj["server"], "/curves", payload)
    out_dir = _ensure_out_dir(out)
    for entry in response["curves"]:
        criterion = entry["criterion"].replace("=", "").replace(".", "p")
        stem = f"curves_{entry['class_label']}_{criterion}"
        (out_dir / f"{stem}.csv").write_text(entry["csv"], encoding="utf-8")
        for metric, content in entry.get("svg", {}).items():
            (out_dir / f"{stem}_{metric}.svg").write_text(content, encoding="utf-8")
        click.echo(f"wrote {stem}.csv")
    for warning in response["warnings"]:
        click.echo(f"warning: {warning}", err=True)


@cli.command()
@click.option("--detections", required=True, help="Detection file or directory.")
@click.option("--format", "fmt", type=click.Choice(["csv", "kitti"]), default="csv")
@click.option("--classes", default=None, help="Comma-separated class names.")
@click.option("--config", "config_path", default=None, help="JSON config file.")
@click.option("--repetitions", type=int, default=3, show_default=True)
@click.option("--out", default=None, help="Directory for the JSON timing report.")
@click.pass_context
def bench(ctx, detections, fmt, classes, config_path, repetitions, out):
    """Measure tracking-stage throughput (parsing excluded)."""
    if repetitions < 3:
        raise ConfigError("--repetitions must be at least 3")
    payload = {
        "sequences": _collect_files(detections, fmt),
        "classes": _parse_classes(classes),
        "repetitions": repetitions,
    }
    config = _load_config_payload(config_path)
    if config:
        payload["config"] = config
    response = _post(ctx.obj["server"], "/bench", payload)
    click.echo(
        f"{response['frames']} frames x {response['repetitions']} repetitions:"
        f" median {response['fps_median']:.1f} FPS"
        f" (runs: {', '.join(f'{v:.1f}' for v in response['fps_runs'])})"
    )
    out_dir = _ensure_out_dir(out)
    if out_dir is not None:
        (out_dir / "bench.json").write_text(
            json.dumps(response, indent=2) + "\n", encoding="utf-8"
        )


@cli.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    """Run the service with uvicorn."""
    import uvicorn

    uvicorn.run("mot3d.service.app:app", host=host, port=port)


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        sys.exit(1)
    except click.UsageError as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        sys.exit(1)
    except click.ClickException as exc:
        exc.show()
        sys.exit(1)
    except ConfigError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    except DataError as exc:
        click.echo(f"data error: {exc}", err=True)
        sys.exit(2)
    except Mot3DError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    return 0


if __name__ == "__main__":
    main()
