"""Constant-velocity Kalman filtering of oriented 3D boxes.

State mean is (x, y, z, theta, l, w, h, vx, vy, vz), optionally extended with
a yaw rate as an 11th component. Only the first seven components are observed.
Time is frame-indexed: velocities are displacements per frame, and prediction
adds them once per step.

All operations are pure: they take a state and return a new one.
"""

import functools
import math
from dataclasses import dataclass

import numpy as np

from .errors import FilterError
from .geometry import Box3D, normalize_angle

NUM_OBSERVED = 7  # x, y, z, theta, l, w, h
_THETA = 3


@dataclass(frozen=True)
class FilterParams:
    """Diagonal covariance configuration, in squared meters/radians per frame.

    Defaults express "trust the first detection's pose, know nothing about
    velocity": initial uncertainty is identity scaled by 10 on the observed
    block and by 1000 on the velocity block; process noise acts on the
    velocity block only; measurement noise is identity.
    """

    initial_observed_var: float = 10.0
    initial_velocity_var: float = 1000.0
    process_observed_var: float = 0.0
    process_velocity_var: float = 1.0
    measurement_var: float = 1.0
    orientation_correction: bool = True


@dataclass(frozen=True)
class TrackState:
    """Filter mean and covariance for one trajectory.

    10 components by default, 11 when the yaw-rate extension is enabled.
    The arrays are treated as immutable; operations return fresh states.
    """

    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        cov = np.asarray(self.covariance, dtype=float)
        if mean.ndim != 1 or mean.shape[0] not in (10, 11):
            raise ValueError("state mean must have 10 or 11 components")
        if cov.shape != (mean.shape[0],) * 2:
            raise ValueError("covariance shape must match the mean")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    @property
    def has_yaw_rate(self) -> bool:
        return self.dim == 11

    @property
    def box(self) -> Box3D:
        return Box3D.from_array(self.mean[:NUM_OBSERVED])


@functools.lru_cache(maxsize=8)
def _transition_matrix(dim: int) -> np.ndarray:
    f = np.eye(dim)
    f[0, 7] = 1.0  # x += vx
    f[1, 8] = 1.0  # y += vy
    f[2, 9] = 1.0  # z += vz
    if dim == 11:
        f[_THETA, 10] = 1.0  # theta += yaw rate
    f.flags.writeable = False
    return f


@functools.lru_cache(maxsize=32)
def _process_noise(dim: int, observed_var: float, velocity_var: float) -> np.ndarray:
    diag = np.full(dim, velocity_var)
    diag[:NUM_OBSERVED] = observed_var
    q = np.diag(diag)
    q.flags.writeable = False
    return q


def init_state(box: Box3D, params: FilterParams = FilterParams(), use_yaw_rate: bool = False) -> TrackState:
    """State centered on a detection box with zero velocity."""
    dim = 11 if use_yaw_rate else 10
    mean = np.zeros(dim)
    mean[:NUM_OBSERVED] = box.to_array()
    diag = np.full(dim, params.initial_velocity_var)
    diag[:NUM_OBSERVED] = params.initial_observed_var
    covariance = np.diag(diag)
    return TrackState(mean, covariance)


def predict(state: TrackState, params: FilterParams = FilterParams()) -> TrackState:
    """Advance one frame under the constant-velocity model."""
    f = _transition_matrix(state.dim)
    mean = state.mean.copy()
    mean[:3] += mean[7:10]
    if state.dim == 11:
        mean[_THETA] += mean[10]
    mean[_THETA] = normalize_angle(mean[_THETA])
    q = _process_noise(state.dim, params.process_observed_var, params.process_velocity_var)
    covariance = f @ state.covariance @ f.T + q
    return TrackState(mean, covariance)


def correct_orientation(traj_theta: float, det_theta: float) -> float:
    """Flip the trajectory heading by pi when it opposes the detection heading.

    Returns the (normalized) trajectory angle whose difference to the
    detection angle is at most pi/2 in absolute value. The flip region is the
    half-open half circle [pi/2, pi] + (-pi, -pi/2), which makes the operation
    idempotent at the boundary.
    """
    diff = normalize_angle(det_theta - traj_theta)
    half_pi = 0.5 * math.pi
    if diff >= half_pi or diff < -half_pi:
        return normalize_angle(traj_theta + math.pi)
    return normalize_angle(traj_theta)


def update(state: TrackState, box: Box3D, params: FilterParams = FilterParams()) -> TrackState:
    """Fuse a matched detection into the state.

    The heading is reconciled first (unless disabled), then the standard
    gain/posterior update runs on the seven observed components with the yaw
    residual wrapped. Posterior covariance uses the Joseph form, which keeps
    it symmetric positive-semidefinite.
    """
    dim = state.dim
    mean = state.mean.copy()
    if params.orientation_correction:
        mean[_THETA] = correct_orientation(mean[_THETA], box.yaw)

    residual = box.to_array() - mean[:NUM_OBSERVED]
    residual[_THETA] = normalize_angle(residual[_THETA])

    # the observation picks the first NUM_OBSERVED components, so H appears
    # only as row/column selections here
    p = state.covariance
    r_var = params.measurement_var
    innovation_cov = p[:NUM_OBSERVED, :NUM_OBSERVED].copy()
    innovation_cov[np.diag_indices(NUM_OBSERVED)] += r_var
    try:
        gain = np.linalg.solve(innovation_cov, p[:NUM_OBSERVED, :]).T
    except np.linalg.LinAlgError as exc:
        raise FilterError("singular innovation covariance; check P/Q/R configuration") from exc

    mean = mean + gain @ residual
    mean[_THETA] = normalize_angle(mean[_THETA])
    identity_kh = np.eye(dim)
    identity_kh[:, :NUM_OBSERVED] -= gain
    covariance = identity_kh @ p @ identity_kh.T + r_var * (gain @ gain.T)
    covariance = 0.5 * (covariance + covariance.T)
    return TrackState(mean, covariance)
