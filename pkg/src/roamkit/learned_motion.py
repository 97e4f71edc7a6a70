"""Assembly of the learned dynamical system.

``train`` runs the full pipeline: preprocessing, K-means clustering with
hierarchy, per-cluster deviation regression, and transparent-wall hull
avoidance wired around each cluster's local flow.  The result evaluates
a velocity for every point in the plane: the active cluster's hull keeps
trajectories inside the region of influence and lets them exit only
through the wall to the parent, while positions outside every region
fall back to linear attraction toward the nearest cluster center.

``MotionLearner`` wraps the pipeline in a scikit-learn style estimator.
"""

from dataclasses import dataclass, field, asdict

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .avoidance import RoamParams, RotationalAvoider
from .cluster_model import fit_cluster_model
from .demonstrations import FeatureConfig, build_features
from .deviation import PHI_MAX_DEFAULT, fit_deviation, local_dynamics
from .dynamics import CallableDynamics
from .exceptions import RoamkitError, TrainingError
from .validation import as_point, as_points


@dataclass
class TrainingConfig:
    """All pipeline knobs in one serializable place."""

    feature: FeatureConfig = field(default_factory=FeatureConfig)
    regressor: dict = field(default_factory=dict)
    roam: RoamParams = field(default_factory=RoamParams)
    phi_max: float = PHI_MAX_DEFAULT
    speed_gain: float = 1.0
    speed_cap: float = 2.0
    fallback_gain: float = 1.0
    influence_radius: float | None = None
    influence_factor: float = 1.5
    max_reject_fraction: float = 0.2

    # Fraction of the wall half-distance by which each cluster's target
    # is advanced beyond the parent wall.  On the wall itself the target
    # would be a singular point of the direction field right on the
    # cluster-switch boundary, and rollouts stall orbiting it; advancing
    # it into the parent's cell makes every flowline cross the wall
    # first.
    target_overshoot: float = 0.3

    @classmethod
    def from_dict(cls, data):
        data = dict(data or {})
        feature = FeatureConfig(**data.pop("feature", {}))
        roam = RoamParams(**data.pop("roam", {}))
        return cls(feature=feature, roam=roam, **data)

    def to_dict(self):
        return asdict(self)


@dataclass
class TrainingReport:
    """Summary emitted by ``train`` for logging and the CLI."""

    k: int
    seed: int
    n_samples: int
    n_demonstrations: int
    cluster_sizes: list
    rejected_fractions: list
    influence_radius: float
    attractor: list

    def to_dict(self):
        return asdict(self)


class ClusterHullObstacle:
    """One cluster presented as a boundary obstacle.

    Gamma, normal, and reference direction already carry the inverted
    (hull) sense, so the avoidance engines use it like any obstacle.
    The last wall-set evaluation is memoized; engines query gamma and
    normal back to back at the same position.
    """

    is_boundary = True

    def __init__(self, model, cluster):
        self.model = model
        self.cluster = cluster
        self._cache_key = None
        self._cache_walls = None

    def _walls(self, position):
        key = (float(position[0]), float(position[1]))
        if key != self._cache_key:
            self._cache_walls = self.model.wall_set(self.cluster, position)
            self._cache_key = key
        return self._cache_walls

    def gamma(self, position):
        return self._walls(position).gamma

    def normal(self, position):
        return self.model.cluster_normal(
            self.cluster, position, walls=self._walls(position)
        )

    def reference_direction(self, position):
        rel = np.asarray(position, dtype=float) - self.model.centers[self.cluster]
        norm = np.linalg.norm(rel)
        if norm < 1e-12:
            return np.array([-1.0, 0.0])
        return -rel / norm


class LearnedDynamics:
    """Cluster model + deviation models + hull avoidance as one field."""

    def __init__(
        self,
        cluster_model,
        deviation_models,
        roam_params=None,
        speed_gain=1.0,
        speed_cap=2.0,
        fallback_gain=1.0,
    ):
        if len(deviation_models) != cluster_model.k:
            raise ValueError("one deviation model per cluster required")
        self.cluster_model = cluster_model
        self.deviation_models = list(deviation_models)
        self.roam_params = roam_params if roam_params is not None else RoamParams()
        self.speed_gain = float(speed_gain)
        self.speed_cap = float(speed_cap)
        self.fallback_gain = float(fallback_gain)
        self._avoiders = [
            RotationalAvoider(
                [ClusterHullObstacle(cluster_model, o)],
                CallableDynamics(
                    self._local_field(o),
                    attractor=self.deviation_models[o].base_target,
                ),
                self.roam_params,
            )
            for o in range(cluster_model.k)
        ]

    @property
    def attractor(self):
        return self.cluster_model.attractor

    def _local_field(self, cluster):
        def field(position):
            return self.local_velocity(cluster, position)

        return field

    def local_velocity(self, cluster, position):
        """Learned local flow of ``cluster`` (before hull avoidance)."""
        model = self.deviation_models[cluster]
        if np.linalg.norm(model.base_target - np.asarray(position, float)) < 1e-12:
            # On the wall-crossing target: hand over to the parent cluster.
            parent = self.cluster_model.transparent_wall(cluster)
            if parent is None:
                return np.zeros(2)
            return self.local_velocity(parent, position)
        return local_dynamics(
            model,
            position,
            self.attractor,
            gain=self.speed_gain,
            speed_cap=self.speed_cap,
        )

    def deviation(self, cluster, position):
        """Clipped deviation angle of one cluster at ``position``."""
        return self.deviation_models[cluster].deviation(position)

    def evaluate(self, position):
        """Velocity at ``position``; defined for every finite point."""
        position = as_point(position, dim=2)
        cluster = self.cluster_model.predict_cluster(position)
        if cluster is None:
            distances = np.linalg.norm(self.cluster_model.centers - position, axis=1)
            nearest = self.cluster_model.centers[int(np.argmin(distances))]
            return -self.fallback_gain * (position - nearest)
        if np.linalg.norm(position - self.attractor) < 1e-12:
            return np.zeros(2)
        return self._avoiders[cluster].evaluate(position)

    def __call__(self, position):
        return self.evaluate(position)

    def gamma(self, position):
        """Hull gamma of the active cluster (+inf outside all regions)."""
        return self.cluster_model.min_gamma(position)


def _wall_crossing_target(features, labels, cluster, parent, centers, overshoot=0.3):
    """Mean demonstration crossing point through the parent wall, advanced
    past the wall by ``overshoot`` of the half center distance."""
    offset = centers[parent] - centers[cluster]
    distance = np.linalg.norm(offset)
    normal = offset / distance
    midpoint = 0.5 * (centers[parent] + centers[cluster])
    crossings = []
    for demo_id in np.unique(features.demo_ids):
        mask = features.demo_ids == demo_id
        positions = features.positions[mask]
        demo_labels = labels[mask]
        for i in range(len(positions) - 1):
            if demo_labels[i] != cluster or demo_labels[i + 1] != parent:
                continue
            a, b = positions[i], positions[i + 1]
            da = float(np.dot(normal, a - midpoint))
            db = float(np.dot(normal, b - midpoint))
            if da == db:
                crossings.append(0.5 * (a + b))
            else:
                tau = np.clip(da / (da - db), 0.0, 1.0)
                crossings.append(a + tau * (b - a))
    base = midpoint if not crossings else np.mean(crossings, axis=0)
    return base + overshoot * 0.5 * distance * normal


def train(demos, k=8, seed=0, config=None):
    """Run the full learning pipeline.

    Returns ``(LearnedDynamics, TrainingReport)``.  Failures carry the
    pipeline stage in the error message.
    """
    config = config or TrainingConfig()
    try:
        features = build_features(demos, config.feature)
    except (RoamkitError, ValueError) as error:
        if isinstance(error, TrainingError):
            raise
        raise TrainingError("preprocessing", str(error)) from error

    model, labels = fit_cluster_model(
        features,
        k,
        seed,
        config.feature,
        influence_radius=config.influence_radius,
        influence_factor=config.influence_factor,
        gamma_cap=config.roam.gamma_cap,
    )

    deviation_models = []
    rejected_fractions = []
    cluster_sizes = []
    for cluster in range(model.k):
        members = labels == cluster
        cluster_sizes.append(int(members.sum()))
        parent = model.transparent_wall(cluster)
        if parent is None:
            target = model.attractor
        else:
            target = _wall_crossing_target(
                features,
                labels,
                cluster,
                parent,
                model.centers,
                overshoot=config.target_overshoot,
            )
        deviation_model, n_rejected = fit_deviation(
            cluster,
            features.positions[members],
            features.directions[members],
            target,
            regressor_config=config.regressor,
            phi_max=config.phi_max,
            max_reject_fraction=config.max_reject_fraction,
        )
        deviation_models.append(deviation_model)
        rejected_fractions.append(
            float(n_rejected) / max(int(members.sum()), 1)
        )

    dynamics = LearnedDynamics(
        model,
        deviation_models,
        roam_params=config.roam,
        speed_gain=config.speed_gain,
        speed_cap=config.speed_cap,
        fallback_gain=config.fallback_gain,
    )
    report = TrainingReport(
        k=model.k,
        seed=int(seed),
        n_samples=features.n_samples,
        n_demonstrations=int(len(np.unique(features.demo_ids))),
        cluster_sizes=cluster_sizes,
        rejected_fractions=rejected_fractions,
        influence_radius=model.influence_radius,
        attractor=model.attractor.tolist(),
    )
    return dynamics, report


class MotionLearner(BaseEstimator):
    """Scikit-learn style front end for the learning pipeline.

    ``fit`` consumes a list of ``Demonstration`` objects and ``predict``
    maps an (n, 2) array of positions to (n, 2) velocities of the
    learned field.
    """

    def __init__(
        self,
        n_clusters=8,
        seed=0,
        phi_max=PHI_MAX_DEFAULT,
        speed_gain=1.0,
        speed_cap=2.0,
        fallback_gain=1.0,
        regressor_backend="svr",
        svr_c=10.0,
        svr_epsilon=0.05,
        ridge_alpha=0.1,
        position_scale=1.0,
        direction_scale=1.5,
        sequence_scale=2.0,
        smoothing_window=5,
        influence_radius=None,
        influence_factor=1.5,
        smoothness_exponent=3.0,
    ):
        self.n_clusters = n_clusters
        self.seed = seed
        self.phi_max = phi_max
        self.speed_gain = speed_gain
        self.speed_cap = speed_cap
        self.fallback_gain = fallback_gain
        self.regressor_backend = regressor_backend
        self.svr_c = svr_c
        self.svr_epsilon = svr_epsilon
        self.ridge_alpha = ridge_alpha
        self.position_scale = position_scale
        self.direction_scale = direction_scale
        self.sequence_scale = sequence_scale
        self.smoothing_window = smoothing_window
        self.influence_radius = influence_radius
        self.influence_factor = influence_factor
        self.smoothness_exponent = smoothness_exponent

    def _training_config(self):
        return TrainingConfig(
            feature=FeatureConfig(
                position_scale=self.position_scale,
                direction_scale=self.direction_scale,
                sequence_scale=self.sequence_scale,
                smoothing_window=self.smoothing_window,
            ),
            regressor={
                "backend": self.regressor_backend,
                "C": self.svr_c,
                "epsilon": self.svr_epsilon,
                "alpha": self.ridge_alpha,
            },
            roam=RoamParams(smoothness_exponent=self.smoothness_exponent),
            phi_max=self.phi_max,
            speed_gain=self.speed_gain,
            speed_cap=self.speed_cap,
            fallback_gain=self.fallback_gain,
            influence_radius=self.influence_radius,
            influence_factor=self.influence_factor,
        )

    def fit(self, X, y=None):
        """Fit on a list of demonstrations (``y`` is ignored)."""
        self.dynamics_, self.report_ = train(
            X, k=self.n_clusters, seed=self.seed, config=self._training_config()
        )
        return self

    def predict(self, X):
        """Velocities of the learned field at positions ``X`` (n, 2)."""
        if not hasattr(self, "dynamics_"):
            raise NotFittedError("MotionLearner must be fitted before predict")
        positions = as_points(X, dim=2)
        return np.array([self.dynamics_.evaluate(p) for p in positions])

    @property
    def attractor_(self):
        if not hasattr(self, "dynamics_"):
            raise NotFittedError("MotionLearner must be fitted first")
        return self.dynamics_.attractor
