"""Motion-generation toolkit: rotation-based obstacle avoidance around
star-shaped obstacles and hulls, plus cluster-regression motion learning
from demonstrations."""

__version__ = "0.1.0"

from .avoidance import (
    ModulationAvoider,
    RoamParams,
    RotationalAvoider,
    compute_tangent,
    convergence_weight,
)
from .demonstrations import (
    Demonstration,
    FeatureConfig,
    build_features,
    estimate_velocities,
    load_demonstrations_csv,
    save_demonstrations_csv,
)
from .directional import (
    angle_between,
    directional_weighted_mean,
    geodesic_interpolate,
    rotate_in_plane_2d,
)
from .dynamics import CallableDynamics, LinearDynamics, SpiralDynamics
from .exceptions import (
    DegenerateDirectionError,
    ModelFormatError,
    OutsideInfluenceError,
    PenetrationError,
    RoamkitError,
    TrainingError,
    ZeroVelocityError,
)
from .learned_motion import LearnedDynamics, MotionLearner, TrainingConfig, train
from .obstacles import BoundaryObstacle, Ellipse, StarPolygon, invert
from .rollout import RolloutResult, integrate, sample_grid
from .serialization import load_model, save_model

__all__ = [
    "BoundaryObstacle",
    "CallableDynamics",
    "DegenerateDirectionError",
    "Demonstration",
    "Ellipse",
    "FeatureConfig",
    "LearnedDynamics",
    "LinearDynamics",
    "ModelFormatError",
    "ModulationAvoider",
    "MotionLearner",
    "OutsideInfluenceError",
    "PenetrationError",
    "RoamParams",
    "RoamkitError",
    "RolloutResult",
    "RotationalAvoider",
    "SpiralDynamics",
    "StarPolygon",
    "TrainingConfig",
    "TrainingError",
    "ZeroVelocityError",
    "angle_between",
    "build_features",
    "compute_tangent",
    "convergence_weight",
    "directional_weighted_mean",
    "estimate_velocities",
    "geodesic_interpolate",
    "integrate",
    "invert",
    "load_demonstrations_csv",
    "load_model",
    "rotate_in_plane_2d",
    "sample_grid",
    "save_demonstrations_csv",
    "save_model",
    "train",
]
