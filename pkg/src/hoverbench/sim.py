"""Deterministic discrete-time simulation of drone and person motion.

The drone is a planar double integrator with linear drag, plus first-order
lags on vertical velocity and yaw rate — a deliberately simple stand-in for
a real quadrotor's closed low-level control loop. The person follows a
seeded waypoint walk whose pace, turning, and crouching all scale with an
aggressiveness knob.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .core import Control, HeadState, Pose3, relative_head_pose, wrap_angle

# Vertical flight envelope (the net around the arena has a ceiling too).
DRONE_Z_MIN = 0.1
DRONE_Z_MAX = 2.8

# Person walk tuning. People challenging a hovering drone lunge, strafe, and
# pause while mostly keeping their face toward it, so walking legs are short,
# facing direction has inertia (it changes only through turn bursts), and
# pauses between legs let the controller re-frame the person. At full
# aggressiveness the person out-walks v_max, which is what makes the drone
# struggle without losing sight entirely.
ARRIVE_DIST = 0.05
WALK_SPEED_MIN = 0.3
LEG_MIN = 0.5  # m, walking-leg length range
LEG_MAX_BASE = 1.2
LEG_MAX_AGGR = 1.3
LEG_DIR_STD = 0.9  # rad, leg-direction spread around the facing axis
LEG_DIR_UNIFORM = False  # True: legs go in fully random directions
TURN_RATE_BASE = 0.8  # rad/s toward the heading target
TURN_RATE_AGGR = 1.1
TURN_BURST_RATE = 0.45  # per second at aggressiveness 1
TURN_BURST_STD = 1.0  # rad, typical burst magnitude
CROUCH_BURST_RATE = 1.2
CROUCH_RELAX = 0.4  # s, z settles toward the crouch target
PERSON_Z_MIN = 1.4
PERSON_Z_MAX = 2.1
WAYPOINT_MARGIN = 0.5


@dataclass(frozen=True)
class SimParams:
    dt: float = 1.0 / 30.0
    drag_k: float = 0.3
    tau_vz: float = 0.3
    tau_yaw: float = 0.2
    arena_half_extent: float = 3.5

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        for name in ("tau_vz", "tau_yaw"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


DEFAULT_SIM = SimParams()


@dataclass(frozen=True)
class PersonProfile:
    """Per-session person characteristics, including the apparent-size confound."""

    eye_height: float = 1.7
    head_size_factor: float = 1.0
    aggressiveness: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if not 0.85 <= self.head_size_factor <= 1.15:
            raise ValueError("head_size_factor must lie in [0.85, 1.15]")
        if not 0.0 <= self.aggressiveness <= 1.0:
            raise ValueError("aggressiveness must lie in [0, 1]")

    def crouch_cap(self) -> float:
        return min(0.45, self.eye_height - (PERSON_Z_MIN + 0.02))


@dataclass(frozen=True)
class DroneState:
    pose: Pose3
    vel: tuple[float, float, float] = (0.0, 0.0, 0.0)
    yaw_rate: float = 0.0


@dataclass(frozen=True)
class PersonState:
    """Person pose plus the walking-script bookkeeping.

    target_xy is None for a person that never walks; otherwise the walk
    advances toward the waypoint and the seeded stream occasionally resamples
    waypoint, facing direction, and crouch depth.
    """

    pose: Pose3
    vel: tuple[float, float] = (0.0, 0.0)
    profile: PersonProfile = field(default_factory=PersonProfile)
    target_xy: tuple[float, float] | None = None
    walk_speed: float = 0.0
    heading_target: float = 0.0
    crouch_target: float = 0.0
    dwell_until: float = 0.0

    def __post_init__(self):
        if not PERSON_Z_MIN <= self.pose.z <= PERSON_Z_MAX:
            raise ValueError(f"person z {self.pose.z} outside [{PERSON_Z_MIN}, {PERSON_Z_MAX}]")


@dataclass(frozen=True)
class WorldState:
    drone: DroneState
    person: PersonState
    t: float = 0.0


def relative_head_state(world: WorldState) -> HeadState:
    """Ground-truth head pose in the drone body frame."""
    return relative_head_pose(world.drone.pose, world.person.pose)


def body_odometry(drone: DroneState):
    """Planar body-frame velocity, as the odometry channel reports it."""
    h = drone.pose.heading
    c = np.cos(-h)
    s = np.sin(-h)
    vx, vy = drone.vel[0], drone.vel[1]
    return float(c * vx - s * vy), float(s * vx + c * vy)


def person_motion_step(
    person: PersonState,
    t: float,
    dt: float,
    rng: np.random.Generator,
    arena_half_extent: float = DEFAULT_SIM.arena_half_extent,
) -> PersonState:
    """Advance the person's waypoint walk by one step.

    All randomness comes from ``rng``; with aggressiveness 0 a person standing
    at its waypoint never moves again (no new waypoints, no turn or crouch
    bursts), which keeps the degenerate script exactly stationary.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if person.target_xy is None:
        return person if person.vel == (0.0, 0.0) else replace(person, vel=(0.0, 0.0))

    prof = person.profile
    aggr = prof.aggressiveness
    x, y, z = person.pose.x, person.pose.y, person.pose.z
    heading = person.pose.heading
    tx, ty = person.target_xy
    walk_speed = person.walk_speed
    heading_target = person.heading_target
    crouch_target = person.crouch_target
    dwell_until = person.dwell_until

    # Turn and crouch bursts; both rates vanish at aggressiveness 0.
    if rng.random() < TURN_BURST_RATE * aggr * dt:
        heading_target = wrap_angle(heading + rng.normal(0.0, TURN_BURST_STD))
    if rng.random() < CROUCH_BURST_RATE * aggr * dt:
        crouch_target = rng.uniform(0.0, prof.crouch_cap())

    dx = tx - x
    dy = ty - y
    dist = math.hypot(dx, dy)
    vel = (0.0, 0.0)

    if dist < ARRIVE_DIST:
        if walk_speed > 0.0:
            # Arrival event: stop, then dwell before the next leg.
            walk_speed = 0.0
            dwell_until = math.inf if aggr <= 0.0 else t + rng.exponential(2.0 * (1.0 - aggr) + 0.4)
        elif aggr > 0.0 and t >= dwell_until:
            # Next leg: a short lunge, mostly along the facing axis (people
            # challenging a hovering drone advance on it and back away more
            # than they strafe); the facing direction itself is left alone.
            leg_len = rng.uniform(LEG_MIN, LEG_MAX_BASE + LEG_MAX_AGGR * aggr)
            if LEG_DIR_UNIFORM:
                leg_dir = rng.uniform(-math.pi, math.pi)
            else:
                forward = heading if rng.random() < 0.5 else heading + math.pi
                leg_dir = forward + rng.normal(0.0, LEG_DIR_STD)
            margin = arena_half_extent - WAYPOINT_MARGIN
            tx = min(max(x + leg_len * math.cos(leg_dir), -margin), margin)
            ty = min(max(y + leg_len * math.sin(leg_dir), -margin), margin)
            walk_speed = rng.uniform(WALK_SPEED_MIN, 0.6 + 1.4 * aggr)
    else:
        step_len = min(walk_speed * dt, dist)
        if dist > 0.0 and step_len > 0.0:
            ux, uy = dx / dist, dy / dist
            x += ux * step_len
            y += uy * step_len
            vel = (ux * step_len / dt, uy * step_len / dt)

    turn_rate = TURN_RATE_BASE + TURN_RATE_AGGR * aggr
    err = wrap_angle(heading_target - heading)
    heading = wrap_angle(heading + max(-turn_rate * dt, min(turn_rate * dt, err)))

    z_goal = prof.eye_height - crouch_target
    z = z + (z_goal - z) * min(1.0, dt / CROUCH_RELAX)

    half = arena_half_extent
    x = min(max(x, -half), half)
    y = min(max(y, -half), half)
    z = min(max(z, PERSON_Z_MIN), PERSON_Z_MAX)

    return replace(
        person,
        pose=Pose3(x, y, z, heading),
        vel=vel,
        target_xy=(tx, ty),
        walk_speed=walk_speed,
        heading_target=heading_target,
        crouch_target=crouch_target,
        dwell_until=dwell_until,
    )


def step(
    world: WorldState,
    u: Control,
    params: SimParams = DEFAULT_SIM,
    person_rng: np.random.Generator | None = None,
) -> WorldState:
    """Advance the world by one tick with semi-implicit Euler integration.

    Body-frame accelerations rotate into the world frame and fight linear
    drag; vertical velocity and yaw rate relax toward their commands with
    first-order lags. Positions clip to the arena box. The person advances
    only when a script stream is supplied; otherwise it holds still.
    """
    d = world.drone
    h = d.pose.heading
    ch = np.cos(h)
    sh = np.sin(h)
    ax_w = u.u_ax * ch - u.u_ay * sh
    ay_w = u.u_ax * sh + u.u_ay * ch

    dt = params.dt
    vx = d.vel[0] + (ax_w - params.drag_k * d.vel[0]) * dt
    vy = d.vel[1] + (ay_w - params.drag_k * d.vel[1]) * dt
    vz = d.vel[2] + (u.u_vz - d.vel[2]) * (dt / params.tau_vz)

    half = params.arena_half_extent
    x = min(max(d.pose.x + vx * dt, -half), half)
    y = min(max(d.pose.y + vy * dt, -half), half)
    z = min(max(d.pose.z + vz * dt, DRONE_Z_MIN), DRONE_Z_MAX)

    yaw_rate = d.yaw_rate + (u.u_wz - d.yaw_rate) * (dt / params.tau_yaw)
    heading = wrap_angle(h + yaw_rate * dt)

    drone = DroneState(Pose3(x, y, z, heading), (float(vx), float(vy), float(vz)), float(yaw_rate))
    person = world.person
    if person_rng is not None:
        person = person_motion_step(person, world.t, dt, person_rng, params.arena_half_extent)
    return WorldState(drone, person, world.t + dt)


@dataclass
class Scenario:
    """Initial world plus the person's randomness stream (None = stands still)."""

    name: str
    world: WorldState
    person_rng: np.random.Generator | None = None


SCENARIO_NAMES = ("approach_90", "approach_45", "approach_0", "still", "scripted")

_APPROACH_ANGLES = {"approach_0": 0.0, "approach_45": math.pi / 4, "approach_90": math.pi / 2}


def sample_profile(rng: np.random.Generator, aggressiveness: float | None = None, seed: int = 0) -> PersonProfile:
    """Draw a person profile; eye height and head size vary per session."""
    eye = rng.uniform(1.6, 1.9)
    size = rng.uniform(0.85, 1.15)
    aggr = rng.uniform(0.2, 0.75) if aggressiveness is None else aggressiveness
    return PersonProfile(float(eye), float(size), float(aggr), seed)


def make_scenario(
    kind: str,
    seed: int = 0,
    aggressiveness: float = 0.7,
    params: SimParams = DEFAULT_SIM,
) -> Scenario:
    """Build a named starting configuration.

    approach_0/45/90: person stands at the arena center facing the drone's
    start pose at the stated angle, drone 3 m away facing the person.
    still: drone starts already holding the target pose.
    scripted: person walks a seeded waypoint script at the given aggressiveness.
    """
    if kind not in SCENARIO_NAMES:
        raise ValueError(f"unknown scenario {kind!r}; expected one of {SCENARIO_NAMES}")

    ss = np.random.SeedSequence(seed)
    profile_ss, walk_ss = ss.spawn(2)
    profile_rng = np.random.default_rng(profile_ss)

    if kind in _APPROACH_ANGLES:
        profile = sample_profile(profile_rng, aggressiveness=0.0, seed=seed)
        person = PersonState(
            Pose3(0.0, 0.0, profile.eye_height, _APPROACH_ANGLES[kind]), profile=profile
        )
        drone = DroneState(Pose3(3.0, 0.0, 1.2, math.pi))
        return Scenario(kind, WorldState(drone, person))

    profile = sample_profile(
        profile_rng,
        aggressiveness=0.0 if kind == "still" else aggressiveness,
        seed=seed,
    )
    heading = float(profile_rng.uniform(-math.pi, math.pi))
    person = PersonState(Pose3(0.0, 0.0, profile.eye_height, heading), profile=profile)

    # Drone starts on station: at the target point, facing the person.
    px = 1.5 * math.cos(heading)
    py = 1.5 * math.sin(heading)
    drone = DroneState(Pose3(px, py, profile.eye_height, wrap_angle(heading + math.pi)))

    if kind == "still":
        return Scenario(kind, WorldState(drone, person))

    # Start dwelling at the spawn point; the walk script picks the first leg.
    walk_rng = np.random.default_rng(walk_ss)
    person = replace(person, target_xy=(0.0, 0.0), heading_target=heading)
    return Scenario(kind, WorldState(drone, person), person_rng=walk_rng)
