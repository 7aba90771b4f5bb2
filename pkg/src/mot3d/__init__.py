"""3D multi-object tracking (Kalman filter + Hungarian association) and a
3D evaluation tool with recall-integral metrics (sAMOTA, AMOTA, AMOTP)."""

from .assignment import (
    AffinityMatrix,
    AffinityMode,
    AssociationResult,
    associate,
    build_affinity,
    hungarian,
)
from .errors import (
    ConfigError,
    DataError,
    FilterError,
    Mot3DError,
    ParseError,
    SchemaError,
    UndefinedMetricError,
)
from .geometry import Box3D, bev_polygon, center_distance, iou_3d, normalize_angle
from .io import (
    Detection3D,
    SequenceBundle,
    parse_detections_csv,
    parse_kitti_labels,
    parse_results_csv,
    write_results_csv,
    write_results_kitti,
)
from .kalman import FilterParams, TrackState, correct_orientation, init_state, predict, update
from .metrics import (
    ClearScore,
    GroundTruthSet,
    HypothesisSet,
    MatchingCriterion,
    MetricsReport,
    clear_metrics,
    emit_curves,
    evaluate_report,
    integral_metrics,
    match_frame,
    recall_sweep,
    scaled_mota,
)
from .tracker import (
    Tracker,
    TrackerConfig,
    TrackOutput,
    TrackStatus,
    Trajectory,
    benchmark_sequence,
    default_config_for_class,
    run_sequence,
)

__version__ = "0.1.0"
