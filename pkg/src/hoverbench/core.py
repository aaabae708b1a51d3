"""Coordinate frames, shared value types, and angle arithmetic.

Conventions used throughout the workbench:

* world frame: x/y horizontal, z up, all lengths in meters;
* body frame: x forward along the drone's heading, y left, z up;
* every stored heading/angle lives in the half-open interval (-pi, pi];
* the relative facing angle of a tracked head is zero when the face points
  back along the drone's -x axis (person straight ahead, looking at the drone).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi

# Facing-angle convention: offset between "faces the observer" and "same heading".
FACING_OFFSET = math.pi


class DegenerateAzimuthError(ValueError):
    """The planar part of a vector is too short to define an azimuth."""


def wrap_angle(a: float) -> float:
    """Wrap an angle to (-pi, pi]; idempotent for values already in range."""
    if not math.isfinite(a):
        raise ValueError(f"angle must be finite, got {a!r}")
    if -math.pi < a <= math.pi:
        return a
    return math.pi - (math.pi - a) % TWO_PI


def wrap_angle_array(a: np.ndarray) -> np.ndarray:
    """Vectorized wrap_angle with the same in-range fast path (bitwise identical)."""
    a = np.asarray(a, dtype=float)
    wrapped = math.pi - np.mod(math.pi - a, TWO_PI)
    return np.where((a > -math.pi) & (a <= math.pi), a, wrapped)


def unit_heading(a: float) -> np.ndarray:
    """Unit vector in the horizontal plane pointing along angle ``a``."""
    if not math.isfinite(a):
        raise ValueError(f"angle must be finite, got {a!r}")
    return np.array([np.cos(a), np.sin(a), 0.0])


def azimuth(p, eps: float = 1e-12) -> float:
    """Planar angle of a 3-vector's (x, y) part, in (-pi, pi].

    Raises DegenerateAzimuthError when the planar norm falls below ``eps``;
    callers that can hit the degenerate case must decide the fallback.
    """
    x = float(p[0])
    y = float(p[1])
    norm = float(np.hypot(x, y))
    if norm < eps or norm == 0.0:
        raise DegenerateAzimuthError(
            f"planar norm {norm:.3e} below epsilon {eps:.3e}"
        )
    a = float(np.arctan2(y, x))
    return math.pi if a == -math.pi else a


def clamp_sym(v, limit):
    """Clamp ``v`` to the symmetric interval [-limit, +limit].

    Works elementwise on arrays; scalar and array paths share the same ufuncs
    so mixed use stays bitwise consistent.
    """
    if not limit > 0:
        raise ValueError(f"limit must be strictly positive, got {limit!r}")
    return np.minimum(np.maximum(v, -limit), limit)


def rotate_planar(x: float, y: float, angle: float) -> tuple[float, float]:
    """Rotate a planar vector by ``angle`` (counterclockwise)."""
    c = np.cos(angle)
    s = np.sin(angle)
    return float(c * x - s * y), float(s * x + c * y)


def _require_finite(name: str, *values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"{name} requires finite values, got {v!r}")


@dataclass(frozen=True)
class Pose3:
    """Position plus yaw heading. Only yaw of the full orientation is modeled."""

    x: float
    y: float
    z: float
    heading: float = 0.0

    def __post_init__(self):
        _require_finite("Pose3", self.x, self.y, self.z)
        object.__setattr__(self, "heading", wrap_angle(self.heading))

    def position(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


@dataclass(frozen=True)
class HeadState:
    """Pose of the tracked head in the drone body frame.

    ``s_theta`` is zero when the face points along the drone's -x axis,
    i.e. the person is ahead of the drone and looking straight at it.
    """

    s_x: float
    s_y: float
    s_z: float
    s_theta: float

    def __post_init__(self):
        _require_finite("HeadState", self.s_x, self.s_y, self.s_z)
        object.__setattr__(self, "s_theta", wrap_angle(self.s_theta))

    def as_array(self) -> np.ndarray:
        return np.array([self.s_x, self.s_y, self.s_z, self.s_theta])


@dataclass(frozen=True)
class Odometry:
    """Planar drone velocity in the body frame, as an odometry sensor reports it."""

    v_x: float
    v_y: float

    def __post_init__(self):
        _require_finite("Odometry", self.v_x, self.v_y)

    def as_array(self) -> np.ndarray:
        return np.array([self.v_x, self.v_y])


@dataclass(frozen=True)
class Control:
    """Commanded accelerations, vertical velocity, and yaw rate.

    u_ax/u_ay are desired body-frame accelerations (stand-ins for pitch/roll),
    u_vz a desired vertical velocity, u_wz a desired yaw rate.
    """

    u_ax: float
    u_ay: float
    u_vz: float
    u_wz: float

    def __post_init__(self):
        _require_finite("Control", self.u_ax, self.u_ay, self.u_vz, self.u_wz)

    def as_array(self) -> np.ndarray:
        return np.array([self.u_ax, self.u_ay, self.u_vz, self.u_wz])


@dataclass(frozen=True)
class FullState:
    """Everything the proximity controller needs: head pose plus odometry."""

    pose: HeadState
    odom: Odometry


def relative_head_pose(observer: Pose3, head: Pose3) -> HeadState:
    """Express ``head`` in the body frame of ``observer``.

    Position is the offset rotated by -observer.heading; the facing angle
    follows the convention documented on HeadState (zero = faces observer).
    """
    dx = head.x - observer.x
    dy = head.y - observer.y
    bx, by = rotate_planar(dx, dy, -observer.heading)
    rel = wrap_angle(head.heading - observer.heading - FACING_OFFSET)
    return HeadState(bx, by, head.z - observer.z, rel)
