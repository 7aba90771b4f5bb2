"""Run configuration: JSON config files plus per-class tracker settings.

Config file schema (all keys optional):

    {
      "classes": ["Car", "Pedestrian"],
      "tracker": {
        "mode": "iou" | "distance",
        "gate": 0.01,
        "bir_min": 3,
        "age_max": 2,
        "use_angular_velocity": false,
        "output_coasting": false,
        "startup_emit_tentative": true,
        "filter": {
          "initial_observed_var": 10.0,
          "initial_velocity_var": 1000.0,
          "process_observed_var": 0.0,
          "process_velocity_var": 1.0,
          "measurement_var": 1.0,
          "orientation_correction": true
        }
      },
      "per_class": {"Pedestrian": {"mode": "distance", "gate": 1.0}},
      "evaluation": {"criterion": "iou", "thresholds": [0.25], "recall_steps": 40,
                     "ground_plane_distance": true}
    }

Flag overrides passed by the CLI take precedence over file values.
"""

import json
from dataclasses import dataclass, field, fields, replace

from .assignment import AffinityMode
from .errors import ConfigError
from .kalman import FilterParams
from .metrics import DEFAULT_RECALL_STEPS, MatchingCriterion
from .tracker import TrackerConfig, default_config_for_class

_TRACKER_KEYS = {
    "mode",
    "gate",
    "bir_min",
    "age_max",
    "use_angular_velocity",
    "output_coasting",
    "startup_emit_tentative",
}
_FILTER_KEYS = {f.name for f in fields(FilterParams)}


@dataclass
class RunConfig:
    """Validated run settings shared by the service and the CLI."""

    classes: list[str] | None = None
    tracker_overrides: dict = field(default_factory=dict)
    per_class: dict[str, dict] = field(default_factory=dict)
    filter_overrides: dict = field(default_factory=dict)
    criterion_kind: str = "iou"
    criterion_thresholds: list[float] = field(default_factory=lambda: [0.25])
    recall_steps: int = DEFAULT_RECALL_STEPS
    ground_plane_distance: bool = True

    def tracker_config_for(self, class_label: str) -> TrackerConfig:
        overrides = dict(self.tracker_overrides)
        overrides.update(self.per_class.get(class_label, {}))
        filter_overrides = dict(self.filter_overrides)
        filter_overrides.update(overrides.pop("filter", {}))
        base = default_config_for_class(class_label)
        if "mode" in overrides:
            overrides["mode"] = _parse_mode(overrides["mode"])
        if filter_overrides:
            unknown = set(filter_overrides) - _FILTER_KEYS
            if unknown:
                raise ConfigError(f"unknown filter keys: {sorted(unknown)}")
            overrides["filter_params"] = replace(FilterParams(), **filter_overrides)
        try:
            return replace(base, **overrides)
        except TypeError as exc:
            raise ConfigError(f"invalid tracker configuration: {exc}") from None

    def criteria(self) -> list[MatchingCriterion]:
        return [
            MatchingCriterion(self.criterion_kind, t, self.ground_plane_distance)
            for t in self.criterion_thresholds
        ]


def _parse_mode(value) -> AffinityMode:
    if isinstance(value, AffinityMode):
        return value
    try:
        return AffinityMode(str(value).lower())
    except ValueError:
        raise ConfigError(
            f"unknown affinity mode {value!r}; expected 'iou' or 'distance'"
        ) from None


def _check_keys(section: dict, allowed: set[str], label: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown {label} keys: {sorted(unknown)}")


def config_from_dict(data: dict) -> RunConfig:
    """Build a validated :class:`RunConfig` from decoded JSON."""
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    _check_keys(data, {"classes", "tracker", "per_class", "evaluation"}, "config")
    config = RunConfig()

    classes = data.get("classes")
    if classes is not None:
        if not isinstance(classes, list) or not all(isinstance(c, str) for c in classes):
            raise ConfigError("classes must be a list of strings")
        config.classes = classes

    tracker = dict(data.get("tracker") or {})
    _check_keys(tracker, _TRACKER_KEYS | {"filter"}, "tracker")
    config.filter_overrides = dict(tracker.pop("filter", {}))
    _check_keys(config.filter_overrides, _FILTER_KEYS, "filter")
    config.tracker_overrides = tracker

    per_class = data.get("per_class") or {}
    if not isinstance(per_class, dict):
        raise ConfigError("per_class must map class names to tracker sections")
    for label, section in per_class.items():
        _check_keys(dict(section), _TRACKER_KEYS | {"filter"}, f"per_class[{label}]")
    config.per_class = {label: dict(section) for label, section in per_class.items()}

    evaluation = dict(data.get("evaluation") or {})
    _check_keys(
        evaluation,
        {"criterion", "thresholds", "recall_steps", "ground_plane_distance"},
        "evaluation",
    )
    if "criterion" in evaluation:
        kind = str(evaluation["criterion"]).lower()
        if kind not in ("iou", "distance"):
            raise ConfigError(f"unknown evaluation criterion {kind!r}")
        config.criterion_kind = kind
    if "thresholds" in evaluation:
        thresholds = evaluation["thresholds"]
        if not isinstance(thresholds, list) or not thresholds:
            raise ConfigError("evaluation.thresholds must be a non-empty list")
        config.criterion_thresholds = [float(t) for t in thresholds]
    if "recall_steps" in evaluation:
        steps = int(evaluation["recall_steps"])
        if steps < 1:
            raise ConfigError("evaluation.recall_steps must be at least 1")
        config.recall_steps = steps
    if "ground_plane_distance" in evaluation:
        config.ground_plane_distance = bool(evaluation["ground_plane_distance"])
    return config


def load_config(path: str) -> RunConfig:
    """Read and validate a JSON config file."""
    try:
        with open(path, encoding="utf-8") as handle:
            data = json.load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path!r} is not valid JSON: {exc}") from None
    return config_from_dict(data)
