"""Geometric proximity controller.

The control law is a stateless function of the relative head pose and the
drone's planar velocity: aim for the point a fixed standoff distance in front
of the person's face, command a clamped velocity toward it, turn the velocity
error into clamped accelerations, and yaw toward the target point.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .core import (
    Control,
    FullState,
    HeadState,
    Odometry,
    Pose3,
    azimuth,
    clamp_sym,
    relative_head_pose,
    unit_heading,
    wrap_angle_array,
    DegenerateAzimuthError,
    FACING_OFFSET,
)


@dataclass(frozen=True)
class ControllerParams:
    """Fixed gains and limits of the proximity controller.

    delta is the standoff distance to hold in front of the face; tau the time
    horizon for reaching the commanded velocity and bearing; eps_azimuth the
    planar-norm floor below which the target direction is numerically
    meaningless and the yaw command falls back to facing the person.
    """

    delta: float = 1.5
    tau: float = 0.5
    v_max: float = 1.5
    a_max: float = 1.0
    w_max: float = 2.0
    eps_azimuth: float = 0.375

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError("delta must be >= 0")
        for name in ("tau", "v_max", "a_max", "w_max", "eps_azimuth"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")


DEFAULT_PARAMS = ControllerParams()

# Numerical floor for the fallback bearing: below this planar distance the
# person sits on top of the drone and no yaw direction is meaningful. Distinct
# from eps_azimuth, which decides when the target point is displaced enough
# for its azimuth to be the better yaw reference.
FALLBACK_EPS = 0.05


def target_point(pose: HeadState, delta: float) -> np.ndarray:
    """Body-frame point ``delta`` meters in front of the person's face.

    The facing direction is e(pi + s_theta) = -e(s_theta); the negated form is
    used so the on-target equilibrium comes out exactly zero.
    """
    direction = -unit_heading(pose.s_theta)
    return pose.as_array()[:3] + delta * direction


def compute_control(state: FullState, params: ControllerParams = DEFAULT_PARAMS) -> Control:
    """Evaluate the proximity control law for one state.

    Velocity and acceleration limits clamp per component. The yaw command
    aims at the target point; when the target sits on top of the drone
    (planar norm < eps_azimuth) the person's own position is used instead,
    and if that is degenerate too the yaw command is zero, which makes the
    face-the-person pose an exact fixed point.
    """
    pose = state.pose
    p = target_point(pose, params.delta)
    two_tau = 2.0 * params.tau
    vbar = clamp_sym(p / two_tau, params.v_max)
    u_ax = clamp_sym((vbar[0] - state.odom.v_x) / params.tau, params.a_max)
    u_ay = clamp_sym((vbar[1] - state.odom.v_y) / params.tau, params.a_max)
    u_vz = vbar[2]

    try:
        yaw_target = azimuth(p, params.eps_azimuth)
    except DegenerateAzimuthError:
        try:
            yaw_target = azimuth((pose.s_x, pose.s_y), FALLBACK_EPS)
        except DegenerateAzimuthError:
            yaw_target = 0.0
    u_wz = clamp_sym(yaw_target / params.tau, params.w_max)

    return Control(float(u_ax), float(u_ay), float(u_vz), float(u_wz))


def compute_control_batch(
    s_pose: np.ndarray,
    odom: np.ndarray,
    params: ControllerParams = DEFAULT_PARAMS,
) -> np.ndarray:
    """Vectorized compute_control over (N, 4) head states and (N, 2) odometry.

    Mirrors the scalar path operation for operation so results are bitwise
    identical; evaluation code relies on that equality.
    """
    s_pose = np.asarray(s_pose, dtype=float)
    odom = np.asarray(odom, dtype=float)
    theta = wrap_angle_array(s_pose[:, 3])
    px = s_pose[:, 0] + params.delta * -np.cos(theta)
    py = s_pose[:, 1] + params.delta * -np.sin(theta)
    pz = s_pose[:, 2] + params.delta * 0.0

    two_tau = 2.0 * params.tau
    vbx = clamp_sym(px / two_tau, params.v_max)
    vby = clamp_sym(py / two_tau, params.v_max)
    vbz = clamp_sym(pz / two_tau, params.v_max)

    u_ax = clamp_sym((vbx - odom[:, 0]) / params.tau, params.a_max)
    u_ay = clamp_sym((vby - odom[:, 1]) / params.tau, params.a_max)

    az_p = np.arctan2(py, px)
    az_p = np.where(az_p == -math.pi, math.pi, az_p)
    az_s = np.arctan2(s_pose[:, 1], s_pose[:, 0])
    az_s = np.where(az_s == -math.pi, math.pi, az_s)
    p_degenerate = np.hypot(px, py) < params.eps_azimuth
    s_degenerate = np.hypot(s_pose[:, 0], s_pose[:, 1]) < FALLBACK_EPS
    yaw_target = np.where(p_degenerate, np.where(s_degenerate, 0.0, az_s), az_p)
    u_wz = clamp_sym(yaw_target / params.tau, params.w_max)

    return np.stack([u_ax, u_ay, vbz, u_wz], axis=1)


def compute_acq_control(
    drone_pose_world: Pose3,
    head_pose_world: Pose3,
    odom: Odometry,
    standoff: float,
    params: ControllerParams = DEFAULT_PARAMS,
    frame_subject: bool = False,
) -> Control:
    """Acquisition-time controller: hold a configurable standoff distance.

    Works from world-frame poses (the simulated equivalent of a motion-capture
    feed), converting to the body frame before applying the same law with
    ``delta`` replaced by ``standoff``. With ``frame_subject`` the yaw command
    aims at the person instead of the target point, which keeps the subject in
    the camera frame during chase transients; translation is unaffected.
    """
    rel = relative_head_pose(drone_pose_world, head_pose_world)
    u = compute_control(FullState(rel, odom), replace(params, delta=standoff))
    if frame_subject:
        try:
            yaw_target = azimuth((rel.s_x, rel.s_y), FALLBACK_EPS)
        except DegenerateAzimuthError:
            yaw_target = 0.0
        u = Control(u.u_ax, u.u_ay, u.u_vz, float(clamp_sym(yaw_target / params.tau, params.w_max)))
    return u
