"""Learning architectures, dataset generation, and the training-size sweep.

Three learned control architectures share one corpus:

* a1 (mediated): regress the head pose from image features, feed the
  designed controller;
* a2 (end-to-end): regress control outputs directly from image features
  plus odometry;
* a3 (mediated, learned controller): the a1 perception model feeding a
  learned state-to-control regressor trained on its own predictions.

Labels are always the designed controller applied to ground-truth state, so
every stored instance can be re-verified exactly.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .camera import CameraParams, ImageFeatures, N_FEATURES, observe
from .controller import (
    ControllerParams,
    DEFAULT_PARAMS,
    compute_acq_control,
    compute_control,
    compute_control_batch,
)
from .core import Control, FullState, HeadState, Odometry, Pose3, clamp_sym, wrap_angle
from .nn import MLPModel, MLPSpec, TrainConfig, TrainReport, init_model, train
from .sim import (
    DroneState,
    PersonProfile,
    PersonState,
    SimParams,
    WorldState,
    body_odometry,
    relative_head_state,
    sample_profile,
    step,
)

log = logging.getLogger(__name__)

TICK_HZ = 30
STANDOFF_MIN = 1.0
STANDOFF_MAX = 2.0
STANDOFF_SEGMENT_S = 20.0
HIDDEN_LAYERS = (256, 128)


U_VARIABLES = ("u_ax", "u_ay", "u_vz", "u_wz")


class ApproachKind(str, Enum):
    GROUND_TRUTH = "groundtruth"
    A1 = "a1"
    A2 = "a2"
    A3 = "a3"


@dataclass(frozen=True)
class DataInstance:
    """One 30 Hz sample: observation, odometry, true state, and control label."""

    session_id: str
    t: float
    im: ImageFeatures
    odom: Odometry
    s_pose: HeadState
    u: Control


@dataclass
class Session:
    session_id: str
    profile: PersonProfile
    seed: int
    standoffs: list[float]
    instances: list[DataInstance]


def _instances_arrays(instances) -> dict[str, np.ndarray]:
    n = len(instances)
    im = np.empty((n, N_FEATURES))
    od = np.empty((n, 2))
    sp = np.empty((n, 4))
    u = np.empty((n, 4))
    for i, inst in enumerate(instances):
        im[i] = inst.im.as_array()
        od[i] = inst.odom.as_array()
        sp[i] = inst.s_pose.as_array()
        u[i] = inst.u.as_array()
    return {"im": im, "odom": od, "s_pose": sp, "u": u}


@dataclass
class SessionSet:
    """Sessions plus the split assignment.

    Test sessions are held out whole; the remaining sessions' instances carry
    a per-instance train ('t') / validation ('v') assignment string.
    """

    sessions: list[Session]
    assignment: dict[str, str]
    seed: int = 0
    validation_fraction: float = 0.21
    _cache: dict = field(default_factory=dict, repr=False)

    def session_ids(self) -> list[str]:
        return [s.session_id for s in self.sessions]

    def test_session_ids(self) -> list[str]:
        return [sid for sid, a in self.assignment.items() if a and a[0] == "s"]

    def _gather(self, want: str) -> dict[str, np.ndarray]:
        if want in self._cache:
            return self._cache[want]
        picked = []
        for sess in self.sessions:
            codes = self.assignment[sess.session_id]
            picked.extend(inst for inst, c in zip(sess.instances, codes) if c == want)
        self._cache[want] = _instances_arrays(picked)
        return self._cache[want]

    def train_arrays(self) -> dict[str, np.ndarray]:
        return self._gather("t")

    def validation_arrays(self) -> dict[str, np.ndarray]:
        return self._gather("v")

    def test_arrays(self) -> dict[str, np.ndarray]:
        return self._gather("s")

    def test_instances(self) -> list[DataInstance]:
        out = []
        for sess in self.sessions:
            if self.assignment[sess.session_id][:1] == "s":
                out.extend(sess.instances)
        return out

    def counts(self) -> dict[str, int]:
        counts = {"t": 0, "v": 0, "s": 0}
        for codes in self.assignment.values():
            for c in counts:
                counts[c] += codes.count(c)
        return {"train": counts["t"], "validation": counts["v"], "test": counts["s"]}


def _acquisition_start(profile: PersonProfile, heading: float, standoff: float) -> WorldState:
    person = PersonState(Pose3(0.0, 0.0, profile.eye_height, heading), profile=profile)
    px = standoff * math.cos(heading)
    py = standoff * math.sin(heading)
    drone = DroneState(Pose3(px, py, profile.eye_height, wrap_angle(heading + math.pi)))
    return WorldState(drone, person)


def generate_session(
    profile: PersonProfile,
    duration: float,
    standoff_schedule=None,
    seed: int = 0,
    *,
    session_id: str = "s00",
    sim_params: SimParams | None = None,
    cam: CameraParams | None = None,
    acq_params: ControllerParams | None = None,
    label_params: ControllerParams = DEFAULT_PARAMS,
    odom_hold_hz: float = 0.0,
) -> Session:
    """Fly one closed-loop acquisition session and emit labeled instances.

    The drone tracks the walking person with the acquisition controller at a
    piecewise-constant standoff resampled every 20 s in [1, 2] m (or taken
    from ``standoff_schedule``). Labels are the designed controller applied
    to the ground-truth state at its own standoff; the acquisition commands
    are never recorded. With ``odom_hold_hz`` > 0 the odometry channel is
    sampled and held at that rate, mimicking a slower sensor.
    """
    if duration <= 0:
        raise ValueError("duration must be positive")
    sim_params = sim_params or SimParams()
    cam = cam or CameraParams()
    if acq_params is None:
        acq_params = label_params

    ss = np.random.SeedSequence(seed)
    walk_ss, cam_ss, sched_ss = ss.spawn(3)
    walk_rng = np.random.default_rng(walk_ss)
    cam_rng = np.random.default_rng(cam_ss)
    sched_rng = np.random.default_rng(sched_ss)

    n_ticks = round(duration * TICK_HZ)
    seg_ticks = round(STANDOFF_SEGMENT_S * TICK_HZ)
    n_segments = max(1, math.ceil(n_ticks / seg_ticks))
    if standoff_schedule is None:
        standoffs = [float(sched_rng.uniform(STANDOFF_MIN, STANDOFF_MAX)) for _ in range(n_segments)]
    else:
        standoffs = [float(s) for s in standoff_schedule]
        if not standoffs:
            raise ValueError("standoff_schedule must not be empty")
    for s in standoffs:
        if not STANDOFF_MIN <= s <= STANDOFF_MAX:
            raise ValueError(f"standoff {s} outside [{STANDOFF_MIN}, {STANDOFF_MAX}]")

    heading0 = float(sched_rng.uniform(-math.pi, math.pi))
    world = _acquisition_start(profile, heading0, standoffs[0])
    world = WorldState(
        world.drone,
        replace(world.person, target_xy=(0.0, 0.0), heading_target=heading0),
        world.t,
    )

    hold_every = round(TICK_HZ / odom_hold_hz) if odom_hold_hz > 0 else 0
    held: Odometry | None = None
    instances: list[DataInstance] = []
    for k in range(n_ticks):
        standoff = standoffs[min(k // seg_ticks, len(standoffs) - 1)]
        vx, vy = body_odometry(world.drone)
        if hold_every:
            if k % hold_every == 0 or held is None:
                held = Odometry(vx, vy)
            odom = held
        else:
            odom = Odometry(vx, vy)
        im = observe(world, cam, cam_rng)
        s_pose = relative_head_state(world)
        u = compute_control(FullState(s_pose, odom), label_params)
        instances.append(DataInstance(session_id, world.t, im, odom, s_pose, u))
        u_acq = compute_acq_control(
            world.drone.pose, world.person.pose, odom, standoff, acq_params, frame_subject=True
        )
        world = step(world, u_acq, sim_params, walk_rng)

    return Session(session_id, profile, seed, standoffs, instances)


def build_corpus(
    n_sessions: int,
    n_test_sessions: int,
    seed: int = 0,
    *,
    duration: float = 180.0,
    validation_fraction: float = 0.21,
    sim_params: SimParams | None = None,
    cam: CameraParams | None = None,
    controller_params: ControllerParams = DEFAULT_PARAMS,
    odom_hold_hz: float = 0.0,
) -> SessionSet:
    """Generate a corpus of sessions with distinct profiles and split it.

    Whole sessions are held out as the test set (seeded choice); remaining
    instances are split train/validation uniformly at random.
    """
    if not 1 <= n_test_sessions < n_sessions:
        raise ValueError("need 1 <= n_test_sessions < n_sessions")
    if not 0.0 < validation_fraction < 1.0:
        raise ValueError("validation_fraction must lie in (0, 1)")

    ss = np.random.SeedSequence(seed)
    prof_ss, pick_ss, split_ss = ss.spawn(3)
    prof_rng = np.random.default_rng(prof_ss)
    pick_rng = np.random.default_rng(pick_ss)
    split_rng = np.random.default_rng(split_ss)

    sessions = []
    for i in range(n_sessions):
        sess_seed = int(prof_rng.integers(0, 2**31 - 1))
        profile = sample_profile(prof_rng, seed=sess_seed)
        sid = f"s{i:02d}"
        log.info("generating session %s (seed %d)", sid, sess_seed)
        sessions.append(
            generate_session(
                profile,
                duration,
                seed=sess_seed,
                session_id=sid,
                sim_params=sim_params,
                cam=cam,
                label_params=controller_params,
                odom_hold_hz=odom_hold_hz,
            )
        )

    test_idx = set(int(i) for i in pick_rng.choice(n_sessions, size=n_test_sessions, replace=False))
    assignment: dict[str, str] = {}
    for i, sess in enumerate(sessions):
        n = len(sess.instances)
        if i in test_idx:
            assignment[sess.session_id] = "s" * n
        else:
            draws = split_rng.random(n)
            assignment[sess.session_id] = "".join("v" if d < validation_fraction else "t" for d in draws)
    return SessionSet(sessions, assignment, seed=seed, validation_fraction=validation_fraction)


@dataclass
class TrainedApproach:
    """A control architecture ready for prediction.

    m1 maps image features to a head-pose estimate; m2 maps image features
    plus odometry straight to control; m3 maps estimated pose plus odometry
    to control. Which models exist depends on the architecture.
    """

    kind: ApproachKind
    m1: MLPModel | None = None
    m2: MLPModel | None = None
    m3: MLPModel | None = None
    params: ControllerParams = DEFAULT_PARAMS
    reports: dict[str, TrainReport] = field(default_factory=dict)

    def __post_init__(self):
        need = {
            ApproachKind.GROUND_TRUTH: (False, False, False),
            ApproachKind.A1: (True, False, False),
            ApproachKind.A2: (False, True, False),
            ApproachKind.A3: (True, False, True),
        }[self.kind]
        have = (self.m1 is not None, self.m2 is not None, self.m3 is not None)
        if have != need:
            raise ValueError(f"{self.kind.value} requires models {need}, got {have}")


def train_approach(
    kind: ApproachKind,
    corpus: SessionSet,
    T: int,
    cfg: TrainConfig,
    seed: int = 0,
    *,
    hidden: tuple[int, ...] = HIDDEN_LAYERS,
    params: ControllerParams = DEFAULT_PARAMS,
    m1_override=None,
) -> TrainedApproach:
    """Train one architecture on T seeded-sampled training instances.

    Validation always uses the full validation split. For a3 the control
    regressor trains on the perception model's own predictions so the two
    stages see consistent inputs; ``m1_override`` lets tests inject an oracle
    perception stage.
    """
    if kind == ApproachKind.GROUND_TRUTH:
        return TrainedApproach(kind, params=params)

    tr = corpus.train_arrays()
    va = corpus.validation_arrays()
    n_train = len(tr["im"])
    if T > n_train:
        raise ValueError(f"T={T} exceeds available training instances ({n_train})")

    root = np.random.default_rng(np.random.SeedSequence((seed, 0xD47A)))
    idx = root.choice(n_train, size=T, replace=False)
    seeds = {name: int(root.integers(0, 2**31 - 1)) for name in ("m1", "m2", "m3")}

    def fit(name: str, x_tr, y_tr, x_va, y_va):
        spec = MLPSpec(x_tr.shape[1], hidden, y_tr.shape[1])
        model = init_model(spec, seeds[name])
        fitted, report = train(model, (x_tr, y_tr), (x_va, y_va), replace(cfg, seed=seeds[name]))
        return fitted, report

    reports: dict[str, TrainReport] = {}
    if kind == ApproachKind.A1:
        m1, reports["m1"] = fit("m1", tr["im"][idx], tr["s_pose"][idx], va["im"], va["s_pose"])
        return TrainedApproach(kind, m1=m1, params=params, reports=reports)

    if kind == ApproachKind.A2:
        x_tr = np.hstack([tr["im"][idx], tr["odom"][idx]])
        x_va = np.hstack([va["im"], va["odom"]])
        m2, reports["m2"] = fit("m2", x_tr, tr["u"][idx], x_va, va["u"])
        return TrainedApproach(kind, m2=m2, params=params, reports=reports)

    if kind == ApproachKind.A3:
        if m1_override is None:
            m1, reports["m1"] = fit("m1", tr["im"][idx], tr["s_pose"][idx], va["im"], va["s_pose"])
        else:
            m1 = m1_override
        s_hat_tr = np.atleast_2d(m1.predict(tr["im"][idx]))
        s_hat_va = np.atleast_2d(m1.predict(va["im"]))
        x_tr = np.hstack([s_hat_tr, tr["odom"][idx]])
        x_va = np.hstack([s_hat_va, va["odom"]])
        m3, reports["m3"] = fit("m3", x_tr, tr["u"][idx], x_va, va["u"])
        return TrainedApproach(kind, m1=m1, m3=m3, params=params, reports=reports)

    raise ValueError(f"cannot train approach {kind}")


def predict_control_batch(
    app: TrainedApproach,
    x_im: np.ndarray,
    x_odom: np.ndarray,
    s_true: np.ndarray | None = None,
) -> np.ndarray:
    """Raw (pre-actuation-clamp) control predictions for a batch of inputs."""
    if app.kind == ApproachKind.GROUND_TRUTH:
        if s_true is None:
            raise ValueError("ground-truth approach needs the true head state")
        return compute_control_batch(s_true, x_odom, app.params)
    if app.kind == ApproachKind.A1:
        s_hat = np.atleast_2d(app.m1.predict(x_im))
        return compute_control_batch(s_hat, x_odom, app.params)
    if app.kind == ApproachKind.A2:
        return np.atleast_2d(app.m2.predict(np.hstack([np.atleast_2d(x_im), np.atleast_2d(x_odom)])))
    s_hat = np.atleast_2d(app.m1.predict(x_im))
    return np.atleast_2d(app.m3.predict(np.hstack([s_hat, np.atleast_2d(x_odom)])))


def predict_control_raw(
    app: TrainedApproach,
    im: ImageFeatures,
    odom: Odometry,
    true_s: HeadState | None = None,
) -> np.ndarray:
    s_true = None if true_s is None else true_s.as_array()[None, :]
    return predict_control_batch(app, im.as_array()[None, :], odom.as_array()[None, :], s_true)[0]


def predict_control(
    app: TrainedApproach,
    im: ImageFeatures,
    odom: Odometry,
    true_s: HeadState | None = None,
) -> Control:
    """Actuated control: raw prediction clamped to the controller's limits.

    The designed-controller paths are already clamped by construction; the
    learned direct regressions can exceed the envelope, so everything passes
    through the same symmetric limits before touching the simulator.
    """
    raw = predict_control_raw(app, im, odom, true_s)
    p = app.params
    return Control(
        float(clamp_sym(raw[0], p.a_max)),
        float(clamp_sym(raw[1], p.a_max)),
        float(clamp_sym(raw[2], p.v_max)),
        float(clamp_sym(raw[3], p.w_max)),
    )


@dataclass(frozen=True)
class SweepConfig:
    """Training-size sweep: sizes, replica counts (non-increasing), seeds."""

    t_values: tuple[int, ...] = (128, 512, 1000, 2000, 5000, 10000, 20000, 50000)
    replicas: tuple[int, ...] = (50, 20, 10, 5, 2, 2, 2, 2)
    seed: int = 0

    def __post_init__(self):
        if len(self.t_values) != len(self.replicas):
            raise ValueError("t_values and replicas must have the same length")
        if any(r < 1 or r > 50 for r in self.replicas):
            raise ValueError("replica counts must lie in [1, 50]")
        if any(a < b for a, b in zip(self.replicas, self.replicas[1:])):
            raise ValueError("replica counts must be non-increasing in T")
        if any(t < 1 for t in self.t_values):
            raise ValueError("training sizes must be >= 1")


@dataclass(frozen=True)
class SweepRow:
    approach: str
    variable: str
    T: int
    replica: int
    r2: float


@dataclass
class SweepReport:
    rows: list[SweepRow]
    seed: int

    def median(self, approach: str, variable: str, T: int) -> float:
        vals = [r.r2 for r in self.rows if (r.approach, r.variable, r.T) == (approach, variable, T)]
        if not vals:
            raise KeyError((approach, variable, T))
        return float(np.median(vals))

    def median_table(self) -> dict[tuple[str, str, int], float]:
        keys = sorted({(r.approach, r.variable, r.T) for r in self.rows})
        return {k: self.median(*k) for k in keys}


def run_sweep(
    corpus: SessionSet,
    sweep: SweepConfig,
    cfg: TrainConfig,
    approaches: tuple[ApproachKind, ...] = (ApproachKind.A1, ApproachKind.A2, ApproachKind.A3),
) -> SweepReport:
    """Train/evaluate every (T, replica, approach) cell on the fixed test set."""
    from .evaluation import evaluate_approach_arrays

    n_train = len(corpus.train_arrays()["im"])
    for t_size in sweep.t_values:
        if t_size > n_train:
            raise ValueError(f"sweep size T={t_size} exceeds training set ({n_train})")

    te = corpus.test_arrays()
    rows: list[SweepRow] = []
    for ti, (t_size, n_rep) in enumerate(zip(sweep.t_values, sweep.replicas)):
        for rep in range(n_rep):
            for ak, kind in enumerate(approaches):
                cell_seed = int(
                    np.random.SeedSequence((sweep.seed, ti, rep, ak)).generate_state(1)[0]
                )
                app = train_approach(kind, corpus, t_size, cfg, seed=cell_seed)
                report = evaluate_approach_arrays(app, te["im"], te["odom"], te["s_pose"], te["u"])
                for var in U_VARIABLES:
                    rows.append(SweepRow(kind.value, var, t_size, rep, report.r2[var]))
                log.info(
                    "sweep T=%d replica=%d %s: %s",
                    t_size,
                    rep,
                    kind.value,
                    " ".join(f"{v}={report.r2[v]:.3f}" for v in U_VARIABLES),
                )
    return SweepReport(rows, sweep.seed)
