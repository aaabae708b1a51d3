"""Workbench for learning and comparing person-following quadrotor controllers."""

from .core import (
    Control,
    FullState,
    HeadState,
    Odometry,
    Pose3,
    azimuth,
    clamp_sym,
    unit_heading,
    wrap_angle,
)
from .controller import ControllerParams, compute_acq_control, compute_control, target_point
from .sim import (
    DroneState,
    PersonProfile,
    PersonState,
    SimParams,
    WorldState,
    make_scenario,
    person_motion_step,
    relative_head_state,
    step,
)
from .camera import CameraParams, ImageFeatures, NoiseParams, features_dim, observe
from .nn import MLPModel, MLPSpec, TrainConfig, TrainReport, init_model, train
from .pipeline import (
    ApproachKind,
    DataInstance,
    SessionSet,
    SweepConfig,
    TrainedApproach,
    build_corpus,
    generate_session,
    predict_control,
    run_sweep,
    train_approach,
)
from .evaluation import R2Report, RolloutMetrics, RolloutTrace, evaluate_approach, r_squared, rollout, rollout_metrics
from .config import WorkbenchConfig, load_config

__version__ = "0.1.0"
