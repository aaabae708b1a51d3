"""Quantitative evaluation: per-variable R² and closed-loop rollouts.

R² is computed on raw model outputs, before any actuation clamping, so it
measures regression quality; rollouts use the clamped commands, so they
measure flying behavior.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .camera import CameraParams, observe
from .core import Odometry, wrap_angle
from .pipeline import (
    ApproachKind,
    TrainedApproach,
    U_VARIABLES,
    predict_control,
    predict_control_batch,
)
from .sim import SimParams, body_odometry, make_scenario, relative_head_state, step


class UndefinedRSquaredError(ValueError):
    """R² is undefined when the reference series has zero variance."""


def r_squared(y, y_hat) -> float:
    """Coefficient of determination: 1 - SS_res / SS_tot.

    1 for a perfect estimator, 0 for one that always answers mean(y),
    negative for anything worse.
    """
    y = np.asarray(y, dtype=float)
    y_hat = np.asarray(y_hat, dtype=float)
    if y.shape != y_hat.shape or y.ndim != 1:
        raise ValueError(f"need equal-length 1-d series, got {y.shape} vs {y_hat.shape}")
    if len(y) < 2:
        raise ValueError("need at least two samples")
    mean = y.mean()
    ss_tot = float(np.sum((y - mean) ** 2))
    if ss_tot == 0.0:
        raise UndefinedRSquaredError("reference series has zero variance")
    ss_res = float(np.sum((y - y_hat) ** 2))
    return 1.0 - ss_res / ss_tot


@dataclass
class R2Report:
    r2: dict[str, float]
    n_samples: int


def evaluate_approach_arrays(
    app: TrainedApproach,
    x_im: np.ndarray,
    x_odom: np.ndarray,
    s_pose: np.ndarray,
    u: np.ndarray,
) -> R2Report:
    """Per-variable R² of raw predictions against stored labels."""
    if len(u) == 0:
        raise ValueError("empty test set")
    pred = predict_control_batch(app, x_im, x_odom, s_pose)
    scores = {var: r_squared(u[:, i], pred[:, i]) for i, var in enumerate(U_VARIABLES)}
    return R2Report(scores, len(u))


def evaluate_approach(app: TrainedApproach, instances) -> R2Report:
    """Convenience wrapper over a list of data instances."""
    from .pipeline import _instances_arrays

    arr = _instances_arrays(list(instances))
    return evaluate_approach_arrays(app, arr["im"], arr["odom"], arr["s_pose"], arr["u"])


@dataclass
class RolloutTrace:
    """Uniformly sampled closed-loop trajectory of one approach."""

    approach: str
    scenario: str
    seed: int
    dt: float
    t: np.ndarray  # (n,)
    drone_pose: np.ndarray  # (n, 4): x, y, z, heading
    drone_vel: np.ndarray  # (n, 3)
    person_pose: np.ndarray  # (n, 4)
    u: np.ndarray  # (n, 4), commanded (clamped)

    def __len__(self) -> int:
        return len(self.t)


@dataclass
class RolloutMetrics:
    settled: bool
    settle_time: float | None
    final_position_error: float
    path_length: float
    mean_abs_jerk: float


def rollout(
    app: TrainedApproach,
    scenario: str,
    duration: float,
    seed: int = 0,
    *,
    sim_params: SimParams | None = None,
    cam: CameraParams | None = None,
    observation_noise: bool = True,
) -> RolloutTrace:
    """Run one closed loop: observe, predict, clamp, step, at 30 Hz."""
    sim_params = sim_params or SimParams()
    cam = cam or CameraParams()
    scen = make_scenario(scenario, seed, params=sim_params)
    cam_rng = (
        np.random.default_rng(np.random.SeedSequence((seed, cam.seed, 0xCA3))) if observation_noise else None
    )

    n = round(duration / sim_params.dt)
    t = np.empty(n)
    drone_pose = np.empty((n, 4))
    drone_vel = np.empty((n, 3))
    person_pose = np.empty((n, 4))
    u_arr = np.empty((n, 4))

    world = scen.world
    for k in range(n):
        im = observe(world, cam, cam_rng)
        odom = Odometry(*body_odometry(world.drone))
        true_s = relative_head_state(world)
        u = predict_control(app, im, odom, true_s)

        t[k] = world.t
        dp = world.drone.pose
        pp = world.person.pose
        drone_pose[k] = (dp.x, dp.y, dp.z, dp.heading)
        drone_vel[k] = world.drone.vel
        person_pose[k] = (pp.x, pp.y, pp.z, pp.heading)
        u_arr[k] = u.as_array()

        world = step(world, u, sim_params, scen.person_rng)

    return RolloutTrace(
        app.kind.value, scenario, seed, sim_params.dt, t, drone_pose, drone_vel, person_pose, u_arr
    )


def rollout_metrics(
    trace: RolloutTrace,
    *,
    delta: float = 1.5,
    pos_tol: float = 0.2,
    bearing_tol: float = 0.1,
) -> RolloutMetrics:
    """Settle time, final error, path length, and smoothness of one trace.

    The drone has settled at the first sample from which it remains within
    ``pos_tol`` of the target point with the person's bearing within
    ``bearing_tol`` for the rest of the trace.
    """
    n = len(trace)
    if n < 2:
        raise ValueError("trace must contain at least two samples")

    tx = trace.person_pose[:, 0] + delta * np.cos(trace.person_pose[:, 3])
    ty = trace.person_pose[:, 1] + delta * np.sin(trace.person_pose[:, 3])
    tz = trace.person_pose[:, 2]
    err = np.sqrt(
        (trace.drone_pose[:, 0] - tx) ** 2
        + (trace.drone_pose[:, 1] - ty) ** 2
        + (trace.drone_pose[:, 2] - tz) ** 2
    )
    bearing_world = np.arctan2(
        trace.person_pose[:, 1] - trace.drone_pose[:, 1],
        trace.person_pose[:, 0] - trace.drone_pose[:, 0],
    )
    bearing = np.abs(
        np.array([wrap_angle(b - h) for b, h in zip(bearing_world, trace.drone_pose[:, 3])])
    )
    ok = (err <= pos_tol) & (bearing < bearing_tol)

    bad = np.nonzero(~ok)[0]
    first_ok = 0 if len(bad) == 0 else int(bad[-1]) + 1
    settled = first_ok < n
    settle_time = float(trace.t[first_ok]) if settled else None

    seg = np.diff(trace.drone_pose[:, :3], axis=0)
    path_length = float(np.sum(np.sqrt(np.sum(seg**2, axis=1))))

    if n >= 3:
        jerk = (trace.drone_vel[2:] - 2.0 * trace.drone_vel[1:-1] + trace.drone_vel[:-2]) / trace.dt**2
        mean_abs_jerk = float(np.mean(np.sqrt(np.sum(jerk**2, axis=1))))
    else:
        mean_abs_jerk = 0.0

    return RolloutMetrics(settled, settle_time, float(err[-1]), path_length, mean_abs_jerk)


def sweep_plot_tables(report) -> dict[str, list[dict]]:
    """Per-variable rows (T, one median-R² column per approach) for plotting."""
    medians = report.median_table()
    approaches = sorted({k[0] for k in medians})
    t_values = sorted({k[2] for k in medians})
    tables: dict[str, list[dict]] = {}
    for var in U_VARIABLES:
        rows = []
        for t_size in t_values:
            row: dict = {"T": t_size}
            for app in approaches:
                row[app] = medians.get((app, var, t_size), math.nan)
            rows.append(row)
        tables[var] = rows
    return tables
