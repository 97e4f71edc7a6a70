"""Per-cluster deviation-angle regression.

Each cluster learns the signed angle between the demonstrated motion
direction and the cluster's base direction (toward the parent-wall
crossing point, or the attractor for the root).  Predictions are clipped
at ``phi_max`` so the local flow always makes forward progress toward
the cluster target.

Positive deviations are counter-clockwise.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist, pdist
from sklearn.kernel_ridge import KernelRidge
from sklearn.svm import SVR

from .directional import rotate_in_plane_2d, signed_angle_2d
from .exceptions import TrainingError
from .validation import as_point, as_points

# Maximal deviation kept after clipping; below pi/2 so the velocity
# never loses its forward component.
PHI_MAX_DEFAULT = 0.4 * np.pi

# Training samples must deviate by less than pi/2 from the base
# direction; larger angles mean the clustering is too coarse.
_TRAIN_REJECT_ANGLE = 0.5 * np.pi


class RbfRegressor:
    """RBF-kernel regressor with a serializable predict path.

    Fitting delegates to scikit-learn (epsilon-insensitive support
    vector regression by default, kernel ridge as the alternative);
    prediction always runs from the stored kernel expansion so in-memory
    and deserialized models agree exactly.
    """

    def __init__(self, backend="svr", C=10.0, epsilon=0.05, alpha=0.1, kernel_width=None):
        if backend not in ("svr", "kernel_ridge"):
            raise ValueError(f"unknown regression backend: {backend!r}")
        self.backend = backend
        self.C = float(C)
        self.epsilon = float(epsilon)
        self.alpha = float(alpha)
        self.kernel_width = kernel_width
        self.support_points = None
        self.dual_coef = None
        self.intercept = 0.0
        self.kernel_gamma = None

    def fit(self, X, y):
        X = as_points(X, dim=2)
        y = np.asarray(y, dtype=float)
        width = self.kernel_width
        if width is None:
            pairwise = pdist(X)
            positive = pairwise[pairwise > 1e-12]
            width = float(np.median(positive)) if positive.size else 1.0
        self.kernel_gamma = 1.0 / (2.0 * width * width)
        if self.backend == "svr":
            machine = SVR(kernel="rbf", gamma=self.kernel_gamma, C=self.C, epsilon=self.epsilon)
            machine.fit(X, y)
            self.support_points = machine.support_vectors_.copy()
            self.dual_coef = machine.dual_coef_.ravel().copy()
            self.intercept = float(machine.intercept_[0])
        else:
            machine = KernelRidge(kernel="rbf", gamma=self.kernel_gamma, alpha=self.alpha)
            machine.fit(X, y)
            self.support_points = X.copy()
            self.dual_coef = machine.dual_coef_.ravel().copy()
            self.intercept = 0.0
        return self

    def predict(self, X):
        if self.support_points is None:
            raise RuntimeError("regressor is not fitted")
        X = as_points(X, dim=2)
        kernel = np.exp(-self.kernel_gamma * cdist(X, self.support_points, "sqeuclidean"))
        return kernel @ self.dual_coef + self.intercept

    def to_config(self):
        return {
            "backend": self.backend,
            "C": self.C,
            "epsilon": self.epsilon,
            "alpha": self.alpha,
            "kernel_gamma": self.kernel_gamma,
            "intercept": self.intercept,
            "support_points": self.support_points.tolist(),
            "dual_coef": self.dual_coef.tolist(),
        }

    @classmethod
    def from_config(cls, config):
        regressor = cls(
            backend=config["backend"],
            C=config["C"],
            epsilon=config["epsilon"],
            alpha=config["alpha"],
        )
        regressor.kernel_gamma = float(config["kernel_gamma"])
        regressor.intercept = float(config["intercept"])
        regressor.support_points = np.asarray(config["support_points"], dtype=float)
        regressor.dual_coef = np.asarray(config["dual_coef"], dtype=float)
        return regressor


@dataclass
class DeviationModel:
    """Clipped deviation field of one cluster."""

    cluster: int
    base_target: np.ndarray
    regressor: RbfRegressor
    phi_max: float = PHI_MAX_DEFAULT

    def base_direction(self, position):
        """Unit direction from ``position`` toward the cluster target."""
        offset = self.base_target - as_point(position, dim=2)
        distance = np.linalg.norm(offset)
        if distance < 1e-12:
            raise ValueError(
                f"base direction undefined at the cluster target {self.base_target}"
            )
        return offset / distance

    def deviation(self, positions):
        """Clipped deviation angle(s) at one or many positions."""
        single = np.asarray(positions).ndim == 1
        values = self.regressor.predict(as_points(positions, dim=2))
        values = np.clip(values, -self.phi_max, self.phi_max)
        return float(values[0]) if single else values


def fit_deviation(
    cluster,
    positions,
    directions,
    base_target,
    regressor_config=None,
    phi_max=PHI_MAX_DEFAULT,
    max_reject_fraction=0.2,
):
    """Fit the deviation regressor of one cluster.

    ``positions`` and ``directions`` are the cluster members' sample
    positions and unit motion directions.  Targets with magnitude >=
    pi/2 violate the clustering contract: they are dropped with a
    warning, and more than ``max_reject_fraction`` of them is an error.

    Returns ``(model, n_rejected)``.
    """
    positions = as_points(positions, dim=2)
    directions = as_points(directions, dim=2)
    if positions.shape[0] < 5:
        raise TrainingError(
            "deviation",
            f"cluster {cluster}: needs >= 5 member samples, got {positions.shape[0]}",
        )
    base_target = as_point(base_target, dim=2)

    targets = np.empty(positions.shape[0])
    for i, (point, direction) in enumerate(zip(positions, directions)):
        offset = base_target - point
        distance = np.linalg.norm(offset)
        if distance < 1e-12:
            targets[i] = np.nan  # sample sits on the target; drop it
            continue
        targets[i] = signed_angle_2d(offset / distance, direction)

    keep = np.abs(targets) < _TRAIN_REJECT_ANGLE
    keep &= ~np.isnan(targets)
    n_rejected = int(positions.shape[0] - keep.sum())
    if n_rejected:
        warnings.warn(
            f"cluster {cluster}: dropped {n_rejected} samples deviating "
            "by >= pi/2 from the base direction",
            stacklevel=2,
        )
    if n_rejected > max_reject_fraction * positions.shape[0]:
        raise TrainingError(
            "deviation",
            f"cluster {cluster} violates the deviation bound "
            f"({n_rejected}/{positions.shape[0]} samples rejected) -- increase k",
        )
    if keep.sum() < 5:
        raise TrainingError(
            "deviation", f"cluster {cluster}: fewer than 5 usable samples"
        )

    regressor = RbfRegressor(**(regressor_config or {}))
    regressor.fit(positions[keep], targets[keep])
    model = DeviationModel(
        cluster=cluster,
        base_target=base_target,
        regressor=regressor,
        phi_max=float(phi_max),
    )
    return model, n_rejected


def local_dynamics(model, position, attractor, gain=1.0, speed_cap=2.0):
    """Velocity of one cluster's learned local flow.

    Direction: base direction rotated by the clipped deviation.
    Magnitude: ``gain * min(|xi - attractor|, speed_cap)``, which decays
    linearly near the attractor and saturates far away.
    """
    position = as_point(position, dim=2)
    distance = float(np.linalg.norm(position - attractor))
    speed = gain * min(distance, speed_cap)
    if speed == 0.0:
        return np.zeros(2)
    direction = rotate_in_plane_2d(
        model.base_direction(position), model.deviation(position)
    )
    return speed * direction
