import math
from dataclasses import replace

import numpy as np
import pytest

from hoverbench.controller import (
    ControllerParams,
    DEFAULT_PARAMS,
    compute_acq_control,
    compute_control,
    compute_control_batch,
    target_point,
)
from hoverbench.core import Control, FullState, HeadState, Odometry, Pose3


def state(sx, sy, sz, sth, vx=0.0, vy=0.0):
    return FullState(HeadState(sx, sy, sz, sth), Odometry(vx, vy))


class TestParams:
    def test_defaults(self):
        p = ControllerParams()
        assert (p.delta, p.tau, p.v_max, p.a_max, p.w_max) == (1.5, 0.5, 1.5, 1.0, 2.0)

    def test_validation(self):
        with pytest.raises(ValueError):
            ControllerParams(tau=0.0)
        with pytest.raises(ValueError):
            ControllerParams(delta=-0.1)


class TestTargetPoint:
    def test_at_standoff(self):
        # head 1.5 m ahead facing the drone: target is the drone's own position
        p = target_point(HeadState(1.5, 0, 0, 0), 1.5)
        assert p == pytest.approx([0.0, 0.0, 0.0], abs=1e-9)

    def test_ahead(self):
        p = target_point(HeadState(3.0, 0, 0, 0), 1.5)
        assert p == pytest.approx([1.5, 0.0, 0.0], abs=1e-9)

    def test_zero_delta(self):
        p = target_point(HeadState(1.5, 1.5, 0.3, 0), 0.0)
        assert p == pytest.approx([1.5, 1.5, 0.3], abs=1e-12)


class TestComputeControl:
    """The four worked examples, hand-derived, at 1e-9."""

    def test_straight_ahead(self):
        # p=(1.5,0,0), vbar=1.5, clamp(3.0 -> 1.0), yaw target 0
        u = compute_control(state(3, 0, 0, 0))
        assert u.u_ax == pytest.approx(1.0, abs=1e-9)
        assert u.u_ay == pytest.approx(0.0, abs=1e-9)
        assert u.u_vz == pytest.approx(0.0, abs=1e-9)
        assert u.u_wz == pytest.approx(0.0, abs=1e-9)

    def test_lateral(self):
        # p=(0,1.5,0); azimuth pi/2; clamp(pi, 2.0) = 2.0
        u = compute_control(state(1.5, 1.5, 0, 0))
        assert u.u_ax == pytest.approx(0.0, abs=1e-9)
        assert u.u_ay == pytest.approx(1.0, abs=1e-9)
        assert u.u_vz == pytest.approx(0.0, abs=1e-9)
        assert u.u_wz == pytest.approx(2.0, abs=1e-9)

    def test_vertical(self):
        # p=(0,0,1): degenerate planar target, bearing fallback of (1.5, 0) is 0
        u = compute_control(state(1.5, 0, 1.0, 0))
        assert u.u_ax == pytest.approx(0.0, abs=1e-9)
        assert u.u_ay == pytest.approx(0.0, abs=1e-9)
        assert u.u_vz == pytest.approx(1.0, abs=1e-9)
        assert u.u_wz == pytest.approx(0.0, abs=1e-9)

    def test_equilibrium(self):
        u = compute_control(state(1.5, 0, 0, 0))
        assert u == Control(0.0, 0.0, 0.0, 0.0)

    def test_clamps_hold_everywhere(self):
        rng = np.random.default_rng(11)
        p = DEFAULT_PARAMS
        n = 100_000
        s = np.column_stack(
            [
                rng.uniform(-4, 4, n),
                rng.uniform(-4, 4, n),
                rng.uniform(-2, 2, n),
                rng.uniform(-math.pi, math.pi, n),
            ]
        )
        odom = rng.uniform(-3, 3, size=(n, 2))
        u = compute_control_batch(s, odom, p)
        assert np.all(np.abs(u[:, 0]) <= p.a_max)
        assert np.all(np.abs(u[:, 1]) <= p.a_max)
        assert np.all(np.abs(u[:, 2]) <= p.v_max)
        assert np.all(np.abs(u[:, 3]) <= p.w_max)

    def test_mirror_symmetry(self):
        # negating s_y, s_theta, v_y negates u_ay and u_wz, keeps u_ax, u_vz
        rng = np.random.default_rng(12)
        n = 100_000
        s = np.column_stack(
            [
                rng.uniform(0.2, 4, n),
                rng.uniform(-3, 3, n),
                rng.uniform(-1.5, 1.5, n),
                rng.uniform(-math.pi + 1e-6, math.pi - 1e-6, n),
            ]
        )
        odom = rng.uniform(-2, 2, size=(n, 2))
        mirrored_s = s * np.array([1.0, -1.0, 1.0, -1.0])
        mirrored_odom = odom * np.array([1.0, -1.0])
        u = compute_control_batch(s, odom)
        um = compute_control_batch(mirrored_s, mirrored_odom)
        assert np.allclose(um[:, 0], u[:, 0], atol=1e-12)
        assert np.allclose(um[:, 1], -u[:, 1], atol=1e-12)
        assert np.allclose(um[:, 2], u[:, 2], atol=1e-12)
        assert np.allclose(um[:, 3], -u[:, 3], atol=1e-12)

    def test_yaw_scale_free(self):
        # u_wz depends on the target point only through its planar direction:
        # scaling p's planar part leaves the yaw command unchanged
        from hoverbench.core import azimuth

        base = compute_control(state(2.0, 1.0, 0, 0.2))
        p = target_point(HeadState(2.0, 1.0, 0, 0.2), 1.5)
        for lam in (0.5, 2.0, 7.5):
            assert azimuth(p) == pytest.approx(azimuth(lam * np.asarray(p)), abs=1e-9)
        assert base.u_wz == pytest.approx(float(np.clip(azimuth(p) / 0.5, -2, 2)), abs=1e-12)

    def test_batch_matches_scalar_bitwise(self):
        rng = np.random.default_rng(13)
        n = 2000
        s = np.column_stack(
            [
                rng.uniform(-4, 4, n),
                rng.uniform(-4, 4, n),
                rng.uniform(-2, 2, n),
                rng.uniform(-8, 8, n),
            ]
        )
        odom = rng.uniform(-3, 3, size=(n, 2))
        batch = compute_control_batch(s, odom)
        for i in range(n):
            u = compute_control(FullState(HeadState(*s[i]), Odometry(*odom[i])))
            assert (batch[i] == u.as_array()).all(), f"row {i} differs"


class TestAcquisitionControl:
    def test_reduces_to_plain_control(self):
        u = compute_acq_control(Pose3(0, 0, 0, 0), Pose3(3, 0, 0, math.pi), Odometry(0, 0), 1.5)
        assert u.u_ax == pytest.approx(1.0, abs=1e-9)
        assert u.u_ay == pytest.approx(0.0, abs=1e-9)
        assert u.u_wz == pytest.approx(0.0, abs=1e-9)

    def test_on_station_at_wider_standoff(self):
        u = compute_acq_control(Pose3(0, 0, 0, 0), Pose3(3, 0, 0, math.pi), Odometry(0, 0), 3.0)
        assert u.as_array() == pytest.approx([0, 0, 0, 0], abs=1e-9)

    def test_rotated_frame(self):
        u = compute_acq_control(
            Pose3(0, 0, 0, math.pi / 2), Pose3(0, 3, 0, -math.pi / 2), Odometry(0, 0), 1.5
        )
        assert u.u_ax == pytest.approx(1.0, abs=1e-9)
        assert u.u_ay == pytest.approx(0.0, abs=1e-9)

    def test_frame_subject_yaws_at_person(self):
        # person off to the side: framing yaw aims at the person, not the target
        drone = Pose3(0, 0, 0, 0)
        head = Pose3(1.0, 1.0, 0, 0)
        plain = compute_acq_control(drone, head, Odometry(0, 0), 1.5)
        framed = compute_acq_control(drone, head, Odometry(0, 0), 1.5, frame_subject=True)
        assert (framed.u_ax, framed.u_ay, framed.u_vz) == (plain.u_ax, plain.u_ay, plain.u_vz)
        expected_yaw = np.clip(math.atan2(1.0, 1.0) / 0.5, -2, 2)
        assert framed.u_wz == pytest.approx(float(expected_yaw), abs=1e-9)
