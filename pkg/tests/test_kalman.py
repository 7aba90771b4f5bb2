"""Filter initialization, prediction, orientation handling, and updates."""

import math

import numpy as np
import pytest

from mot3d.errors import FilterError
from mot3d.geometry import Box3D, normalize_angle
from mot3d.kalman import (
    FilterParams,
    TrackState,
    correct_orientation,
    init_state,
    predict,
    update,
)

from conftest import box, random_box


def state_with_velocity(b: Box3D, velocity, params=FilterParams(), yaw_rate=None):
    st = init_state(b, params, use_yaw_rate=yaw_rate is not None)
    mean = st.mean.copy()
    mean[7:10] = velocity
    if yaw_rate is not None:
        mean[10] = yaw_rate
    return TrackState(mean, st.covariance)


class TestInitState:
    def test_mean_copies_box_with_zero_velocity(self):
        st = init_state(box())
        assert st.mean.tolist() == [0, 0, 0, 0, 1, 1, 1, 0, 0, 0]

    def test_velocity_covariance_block(self):
        params = FilterParams(initial_velocity_var=1234.0)
        st = init_state(box(cx=3.0), params)
        assert np.allclose(np.diag(st.covariance)[7:], 1234.0)
        assert np.allclose(np.diag(st.covariance)[:7], params.initial_observed_var)

    def test_deterministic(self):
        a = init_state(box(cx=1.5, yaw=0.3))
        b = init_state(box(cx=1.5, yaw=0.3))
        assert np.array_equal(a.mean, b.mean)
        assert np.array_equal(a.covariance, b.covariance)

    def test_yaw_rate_extension(self):
        st = init_state(box(), use_yaw_rate=True)
        assert st.dim == 11 and st.has_yaw_rate
        assert st.mean[10] == 0.0


class TestPredict:
    def test_position_advances_by_velocity(self):
        st = state_with_velocity(box(), [1.0, 2.0, 3.0])
        advanced = predict(st)
        assert advanced.mean[:3].tolist() == [1.0, 2.0, 3.0]

    def test_zero_velocity_fixed_point(self):
        st = init_state(box(cx=4.0, cy=-2.0))
        advanced = predict(st)
        assert np.array_equal(advanced.mean, st.mean)

    def test_covariance_trace_grows(self):
        st = init_state(box())
        advanced = predict(st, FilterParams(process_velocity_var=1.0))
        assert np.trace(advanced.covariance) > np.trace(st.covariance)

    def test_theta_untouched_without_yaw_rate(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            st = state_with_velocity(random_box(rng), rng.uniform(-2, 2, size=3))
            assert predict(st).mean[3] == st.mean[3]

    def test_theta_advances_with_yaw_rate(self):
        st = state_with_velocity(box(yaw=0.1), [0, 0, 0], yaw_rate=0.2)
        advanced = predict(st)
        assert advanced.mean[3] == pytest.approx(0.3)
        assert advanced.mean[3] == normalize_angle(advanced.mean[3])


class TestCorrectOrientation:
    def test_small_difference_untouched(self):
        assert correct_orientation(0.0, 0.3) == 0.0

    def test_opposite_heading_flipped(self):
        assert correct_orientation(0.0, math.pi) == pytest.approx(math.pi)

    def test_three_quarter_turn_case(self):
        result = correct_orientation(3 * math.pi / 4, -3 * math.pi / 4)
        assert result == pytest.approx(-math.pi / 4, abs=1e-12)
        assert abs(normalize_angle(-3 * math.pi / 4 - result)) <= math.pi / 2

    def test_idempotent(self):
        rng = np.random.default_rng(31)
        for _ in range(500):
            traj, det = rng.uniform(-10, 10, size=2)
            once = correct_orientation(traj, det)
            assert correct_orientation(once, det) == once

    def test_result_within_quarter_turn(self):
        rng = np.random.default_rng(37)
        for _ in range(500):
            traj, det = rng.uniform(-10, 10, size=2)
            result = correct_orientation(traj, det)
            assert abs(normalize_angle(det - result)) <= math.pi / 2 + 1e-12


class TestUpdate:
    def test_tiny_measurement_noise_dominates(self):
        st = init_state(box())
        params = FilterParams(measurement_var=1e-9)
        posterior = update(st, box(cx=2.0, cy=1.0, cz=0.5), params)
        assert posterior.mean[:3] == pytest.approx([2.0, 1.0, 0.5], abs=1e-6)

    def test_zero_innovation_keeps_mean_and_contracts(self):
        st = init_state(box(cx=1.0))
        posterior = update(st, box(cx=1.0))
        assert posterior.mean == pytest.approx(st.mean, abs=1e-12)
        assert np.trace(posterior.covariance) < np.trace(st.covariance)

    def test_opposite_heading_not_averaged_to_midrange(self):
        params = FilterParams(initial_observed_var=1.0, measurement_var=1.0)
        detection = box(yaw=math.pi - 0.1)
        with_fix = update(init_state(box(), params), detection, params)
        assert abs(normalize_angle(detection.yaw - with_fix.mean[3])) < 0.15

        off = FilterParams(
            initial_observed_var=1.0, measurement_var=1.0, orientation_correction=False
        )
        without_fix = update(init_state(box(), off), detection, off)
        assert 0.5 < without_fix.mean[3] < 2.5

    def test_posterior_heading_at_least_as_close_as_corrected_prior(self):
        rng = np.random.default_rng(43)
        for _ in range(200):
            prior_box = random_box(rng)
            st = init_state(prior_box)
            det = random_box(rng)
            corrected = correct_orientation(prior_box.yaw, det.yaw)
            posterior = update(st, det)
            assert abs(normalize_angle(det.yaw - posterior.mean[3])) <= abs(
                normalize_angle(det.yaw - corrected)
            ) + 1e-9

    def test_posterior_covariance_psd(self):
        rng = np.random.default_rng(47)
        st = init_state(random_box(rng))
        for _ in range(30):
            st = predict(st)
            st = update(st, random_box(rng))
            eigenvalues = np.linalg.eigvalsh(st.covariance)
            assert eigenvalues.min() >= -1e-9
            assert np.allclose(st.covariance, st.covariance.T, atol=1e-9)

    def test_singular_innovation_raises(self):
        params = FilterParams(
            initial_observed_var=0.0, initial_velocity_var=0.0, measurement_var=0.0
        )
        st = init_state(box(), params)
        with pytest.raises(FilterError):
            update(st, box(cx=1.0), params)

    def test_noise_free_constant_velocity_converges(self):
        # noiseless detections of an object moving 1 m/frame along x
        st = init_state(box(cx=0.0))
        errors = []
        for frame in range(1, 21):
            st = predict(st)
            truth = box(cx=float(frame))
            errors.append(abs(st.mean[0] - truth.cx))
            st = update(st, truth)
        assert errors[19] < errors[2]
        assert errors[19] < 1e-3
