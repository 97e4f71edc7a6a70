"""K-means cluster model and its boundary-obstacle geometry.

Each fitted cluster doubles as an enclosing hull for the avoidance
machinery: its walls are the midplanes to Voronoi-adjacent clusters plus
a virtual sphere of the influence radius around the cluster center.  The
wall toward the parent cluster is *transparent* -- its distance value
diverges there so the flow can cross into the successor region -- while
all other walls and the sphere behave like solid hull boundary.

All wall geometry lives in raw position coordinates (meters).
"""

from dataclasses import dataclass

import numpy as np
from scipy.spatial import Delaunay, QhullError

from .directional import directional_weighted_mean
from .exceptions import OutsideInfluenceError, TrainingError
from .kmeans import kmeans_fit
from .validation import as_point

_CENTER_TOL = 1e-12
# Per-wall gamma distances below this count as "on the wall"; they drive
# the weight concentration that makes gamma exactly 1 on wall points.
_WALL_PROXIMITY_EPS = 1e-12


@dataclass
class WallSet:
    """Wall geometry of one cluster evaluated at one query position.

    ``weights`` covers the neighbor walls in ``neighbors`` order plus the
    virtual sphere wall as the final entry; it is a simplex vector.
    ``transparent_wall`` is the neighbor *cluster index* of the wall to
    the parent, or None for the root.
    """

    neighbors: tuple
    normal_distances: np.ndarray
    weights: np.ndarray
    boundary_factor: float
    boundary_point: np.ndarray
    projected_position: np.ndarray
    transparent_wall: int | None
    gamma: float


class ClusterModel:
    """Fitted K-means result with hierarchy and hull geometry.

    Parameters
    ----------
    feature_centers : (k, 5) ndarray
        Cluster centers in raw-block feature space (z-scored position,
        unit direction, sequence).
    centers : (k, 2) ndarray
        Position centers in meters.
    influence_radius : float
        Region-of-influence radius around every center (meters).
    parent : (k,) int ndarray
        Successor cluster per cluster, -1 at the root.
    mean_sequence : (k,) ndarray
        Mean sequence value of each cluster's members.
    attractor : (2,) ndarray
        Global goal point; must lie within the root's influence.
    neighbors : sequence of sequence of int
        Voronoi adjacency between position centers.
    """

    def __init__(
        self,
        feature_centers,
        centers,
        influence_radius,
        parent,
        mean_sequence,
        attractor,
        neighbors,
        normalization=None,
        gamma_cap=1e6,
    ):
        self.feature_centers = np.asarray(feature_centers, dtype=float)
        self.centers = np.asarray(centers, dtype=float)
        self.influence_radius = float(influence_radius)
        self.parent = np.asarray(parent, dtype=int)
        self.mean_sequence = np.asarray(mean_sequence, dtype=float)
        self.attractor = np.asarray(attractor, dtype=float)
        self.neighbors = tuple(tuple(sorted(n)) for n in neighbors)
        self.normalization = normalization
        self.gamma_cap = float(gamma_cap)
        self._validate()
        self._wall_cache = {}

    # -- structure ---------------------------------------------------------

    @property
    def k(self):
        return self.centers.shape[0]

    @property
    def root(self):
        return int(np.flatnonzero(self.parent == -1)[0])

    def _validate(self):
        if self.influence_radius <= 0:
            raise ValueError("influence_radius must be > 0")
        roots = np.flatnonzero(self.parent == -1)
        if len(roots) != 1:
            raise ValueError(f"hierarchy must have exactly one root, got {len(roots)}")
        for start in range(self.k):
            current, hops = start, 0
            while self.parent[current] != -1:
                succ = int(self.parent[current])
                if self.mean_sequence[succ] <= self.mean_sequence[current]:
                    raise ValueError(
                        "mean sequence must strictly increase toward the root"
                    )
                current = succ
                hops += 1
                if hops > self.k:
                    raise ValueError("parent pointers contain a cycle")
        root_distance = np.linalg.norm(self.attractor - self.centers[self.root])
        if root_distance > self.influence_radius:
            raise ValueError(
                "attractor lies outside the root cluster's influence radius"
            )

    def transparent_wall(self, cluster):
        """Neighbor index of the transparent wall, or None for the root."""
        parent = int(self.parent[cluster])
        return None if parent == -1 else parent

    # -- cluster assignment -------------------------------------------------

    def predict_cluster(self, position):
        """Nearest-center cluster if within the influence radius, else None.

        Ties go to the lower cluster index.
        """
        position = as_point(position, dim=2)
        distances = np.linalg.norm(self.centers - position, axis=1)
        nearest = int(np.argmin(distances))
        if distances[nearest] > self.influence_radius:
            return None
        return nearest

    # -- wall geometry -------------------------------------------------------

    def _wall_frames(self, cluster):
        """Per-neighbor (normal, midpoint, half-distance) tuples, cached."""
        if cluster not in self._wall_cache:
            frames = []
            for other in self.neighbors[cluster]:
                offset = self.centers[other] - self.centers[cluster]
                distance = np.linalg.norm(offset)
                if distance < _CENTER_TOL:
                    raise ValueError(
                        f"clusters {cluster} and {other} have coincident centers"
                    )
                frames.append(
                    (
                        offset / distance,
                        0.5 * (self.centers[other] + self.centers[cluster]),
                        0.5 * distance,
                    )
                )
            self._wall_cache[cluster] = frames
        return self._wall_cache[cluster]

    def normal_distance(self, cluster, other, position):
        """Signed distance to the midplane, positive on ``other``'s side."""
        offset = self.centers[other] - self.centers[cluster]
        distance = np.linalg.norm(offset)
        if distance < _CENTER_TOL:
            raise ValueError("coincident cluster centers")
        normal = offset / distance
        midpoint = 0.5 * (self.centers[other] + self.centers[cluster])
        return float(np.dot(normal, as_point(position, dim=2) - midpoint))

    def wall_intersection(self, cluster, other, position, direction):
        """Ray length from ``position`` along ``direction`` to the midplane.

        Returns +inf when the ray is parallel to the plane (excluded from
        boundary-factor minimization by construction).
        """
        offset = self.centers[other] - self.centers[cluster]
        plane_normal = offset / np.linalg.norm(offset)
        denom = float(np.dot(direction, plane_normal))
        if abs(denom) < 1e-15:
            return np.inf
        midpoint = 0.5 * (self.centers[other] + self.centers[cluster])
        return float(np.dot(midpoint - as_point(position, dim=2), plane_normal) / denom)

    def wall_set(self, cluster, position):
        """All wall quantities of ``cluster`` at ``position``.

        The query must lie in the cluster's region (its Voronoi cell
        intersected with the influence ball); boundary points included.
        """
        position = as_point(position, dim=2)
        center = self.centers[cluster]
        rel = position - center
        s = float(np.linalg.norm(rel))
        frames = self._wall_frames(cluster)
        n_walls = len(frames)
        transparent = self.transparent_wall(cluster)

        if s < _CENTER_TOL:
            # Center singularity: weight collapses onto the sphere wall and
            # gamma saturates; direction conventions use the x-axis.
            weights = np.zeros(n_walls + 1)
            weights[-1] = 1.0
            radial = np.array([1.0, 0.0])
            return WallSet(
                neighbors=self.neighbors[cluster],
                normal_distances=np.array(
                    [-frame[2] for frame in frames]
                ),
                weights=weights,
                boundary_factor=self.influence_radius,
                boundary_point=center + self.influence_radius * radial,
                projected_position=center + self.gamma_cap * radial,
                transparent_wall=transparent,
                gamma=self.gamma_cap,
            )

        radial = rel / s
        normal_distances = np.array(
            [float(np.dot(frame[0], position - frame[1])) for frame in frames]
        )

        # Boundary factor: nearest forward wall or sphere crossing along
        # the radial ray.  Slightly negative candidates are boundary
        # points hit by floating-point noise and clamp to zero.
        b = max(self.influence_radius - s, 0.0)
        for frame, d in zip(frames, normal_distances):
            denom = float(np.dot(radial, frame[0]))
            if abs(denom) < 1e-15:
                continue
            candidate = -d / denom
            if candidate > -1e-9:
                b = min(b, max(candidate, 0.0))
        boundary_point = position + b * radial
        boundary_radius = s + b  # boundary point is radial from the center

        if s >= boundary_radius:
            projected_radius = s
        else:
            projected_radius = boundary_radius**2 / s
        projected = center + projected_radius * radial

        # Per-candidate hull gammas: exactly 1 on the own wall/sphere.
        local_radii = projected_radius - normal_distances
        wall_gammas = local_radii / s
        sphere_gamma = self.influence_radius / s
        gammas = np.append(wall_gammas, sphere_gamma)

        # Weight regularization: positive share toward each wall side,
        # sharpened by boundary proximity so the active wall takes all
        # the mass on the boundary itself.
        raw = np.array([max(float(np.dot(frame[0], rel)), 0.0) for frame in frames])
        raw = np.append(raw, s)
        proximity = np.maximum(gammas - 1.0, _WALL_PROXIMITY_EPS)
        weights = raw / proximity
        weights = weights / weights.sum()

        gamma = self._combine_gamma(
            cluster, weights, gammas, normal_distances, projected_radius, s
        )
        return WallSet(
            neighbors=self.neighbors[cluster],
            normal_distances=normal_distances,
            weights=weights,
            boundary_factor=b,
            boundary_point=boundary_point,
            projected_position=projected,
            transparent_wall=transparent,
            gamma=gamma,
        )

    def _combine_gamma(
        self, cluster, weights, gammas, normal_distances, projected_radius, s
    ):
        transparent = self.transparent_wall(cluster)
        if transparent is None:
            combined = float(np.dot(weights, gammas))
        else:
            t = self.neighbors[cluster].index(transparent)
            adjusted, local_radius = transparent_adjust(
                weights,
                t,
                projected_radius - normal_distances[t],
                gamma_cap=self.gamma_cap,
                scale=s,
            )
            gammas = gammas.copy()
            gammas[t] = local_radius / s
            combined = float(np.dot(adjusted, gammas))
        return float(np.clip(combined, 1.0, self.gamma_cap))

    def gamma(self, cluster, position):
        """Hull distance value: 1 on solid walls, huge on the transparent
        wall and at the center, growing inward."""
        position = as_point(position, dim=2)
        if (
            np.linalg.norm(position - self.centers[cluster])
            > self.influence_radius + 1e-9
        ):
            raise OutsideInfluenceError(
                f"position {position} is outside cluster {cluster}'s "
                "region of influence"
            )
        return self.wall_set(cluster, position).gamma

    def gamma_weights(self, cluster, position):
        """Simplex weights over the neighbor walls plus the sphere wall."""
        return self.wall_set(cluster, position).weights

    def boundary_point(self, cluster, position):
        """(boundary factor, boundary point) along the radial ray."""
        walls = self.wall_set(cluster, position)
        return walls.boundary_factor, walls.boundary_point

    def project_position(self, cluster, position):
        """Mirror of an interior position outside the hull boundary."""
        return self.wall_set(cluster, position).projected_position

    def cluster_normal(self, cluster, position, walls=None):
        """Inward hull normal: weighted mean of the into-region wall
        normals (and inward radial for the sphere) about the flipped
        reference direction."""
        position = as_point(position, dim=2)
        if walls is None:
            walls = self.wall_set(cluster, position)
        rel = position - self.centers[cluster]
        s = np.linalg.norm(rel)
        if s < _CENTER_TOL:
            radial = np.array([1.0, 0.0])
        else:
            radial = rel / s
        null_direction = -radial
        directions = [-frame[0] for frame in self._wall_frames(cluster)]
        directions.append(null_direction)
        return directional_weighted_mean(null_direction, directions, walls.weights)

    def min_gamma(self, position):
        """Gamma of the active cluster, or +inf outside all regions."""
        cluster = self.predict_cluster(position)
        if cluster is None:
            return np.inf
        return self.gamma(cluster, position)


def transparent_adjust(weights, t, local_radius_t, gamma_cap=1e6, scale=1.0):
    """Shift wall weights toward the transparent wall and inflate its
    local radius.

    Returns the adjusted simplex vector and the adjusted local radius;
    as the transparent weight approaches 1 the radius saturates at
    ``gamma_cap * scale``.
    """
    weights = np.asarray(weights, dtype=float)
    if not 0 <= t < len(weights):
        raise ValueError(f"transparent wall index {t} out of range")
    w_t = float(weights[t])
    adjusted = np.maximum(weights - w_t, 0.0)
    adjusted[t] = 0.0
    adjusted[t] = 1.0 - adjusted.sum()
    if w_t >= 1.0 - 1e-12:
        local_radius = gamma_cap * scale
    else:
        local_radius = min(local_radius_t / (1.0 - w_t), gamma_cap * scale)
    return adjusted, local_radius


def voronoi_neighbors(centers):
    """Voronoi adjacency of 2-D points (Delaunay dual).

    Degenerate layouts (k <= 2 or collinear centers) fall back to
    consecutive-along-the-line adjacency.
    """
    centers = np.asarray(centers, dtype=float)
    k = centers.shape[0]
    if k == 1:
        return [set()]
    if k == 2:
        return [{1}, {0}]
    try:
        triangulation = Delaunay(centers)
    except QhullError:
        return _collinear_neighbors(centers)
    neighbors = [set() for _ in range(k)]
    for simplex in triangulation.simplices:
        for a in simplex:
            for b in simplex:
                if a != b:
                    neighbors[int(a)].add(int(b))
    return neighbors


def _collinear_neighbors(centers):
    k = centers.shape[0]
    spread = centers - centers.mean(axis=0)
    direction = spread[np.argmax(np.linalg.norm(spread, axis=1))]
    norm = np.linalg.norm(direction)
    direction = np.array([1.0, 0.0]) if norm < 1e-12 else direction / norm
    order = np.argsort(centers @ direction, kind="stable")
    neighbors = [set() for _ in range(k)]
    for first, second in zip(order[:-1], order[1:]):
        neighbors[int(first)].add(int(second))
        neighbors[int(second)].add(int(first))
    return neighbors


def build_hierarchy(mean_sequence, neighbors):
    """Parent pointers along increasing mean sequence.

    The root is the cluster with the largest mean sequence (it holds the
    trajectory ends).  Every other cluster points at its adjacent
    cluster with the smallest mean sequence strictly greater than its
    own; strict increase makes cycles impossible.
    """
    mean_sequence = np.asarray(mean_sequence, dtype=float)
    k = len(mean_sequence)
    root = int(np.argmax(mean_sequence))
    parent = np.full(k, -1, dtype=int)
    for cluster in range(k):
        if cluster == root:
            continue
        successors = [
            other
            for other in neighbors[cluster]
            if mean_sequence[other] > mean_sequence[cluster]
        ]
        if not successors:
            raise TrainingError(
                "hierarchy",
                f"disconnected cluster chain at cluster {cluster}; "
                "change the number of clusters k",
            )
        parent[cluster] = min(successors, key=lambda o: (mean_sequence[o], o))
    return parent


def fit_cluster_model(
    features,
    k,
    seed,
    feature_config,
    influence_radius=None,
    influence_factor=1.5,
    gamma_cap=1e6,
):
    """Fit K-means on the scaled features and assemble the cluster model.

    Returns ``(model, labels)``; the labels index ``features`` rows and
    drive the per-cluster regression fits downstream.
    """
    X = features.scaled(feature_config)
    if X.shape[0] < k:
        raise TrainingError(
            "clustering", f"needs at least k={k} samples, got {X.shape[0]}"
        )
    scaled_centers, labels, _ = kmeans_fit(X, k, seed)
    feature_centers = scaled_centers / feature_config.multipliers()
    centers = features.normalization.denormalize(feature_centers[:, :2])
    mean_sequence = feature_centers[:, 4]

    if influence_radius is None:
        spreads = []
        for j in range(k):
            members = features.positions[labels == j]
            distances = np.linalg.norm(members - centers[j], axis=1)
            spreads.append(np.percentile(distances, 95))
        influence_radius = influence_factor * float(np.max(spreads))
        if influence_radius <= 0:
            raise TrainingError("clustering", "degenerate influence radius")

    neighbors = voronoi_neighbors(centers)
    parent = build_hierarchy(mean_sequence, neighbors)
    attractor = features.ends.mean(axis=0)
    try:
        model = ClusterModel(
            feature_centers=feature_centers,
            centers=centers,
            influence_radius=influence_radius,
            parent=parent,
            mean_sequence=mean_sequence,
            attractor=attractor,
            neighbors=neighbors,
            normalization=features.normalization,
            gamma_cap=gamma_cap,
        )
    except ValueError as error:
        raise TrainingError("hierarchy", str(error)) from error
    return model, labels
