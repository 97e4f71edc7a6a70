"""Cluster model and boundary-obstacle geometry tests.

The workhorse fixture is a synthetic three-cluster chain along the
x-axis: centers (0,0), (2,0), (4,0), hierarchy 0 -> 1 -> 2, so every
midplane is either a solid or a transparent wall with known geometry.
"""

import numpy as np
import pytest

from roamkit.cluster_model import (
    ClusterModel,
    build_hierarchy,
    fit_cluster_model,
    transparent_adjust,
    voronoi_neighbors,
)
from roamkit.demonstrations import Demonstration, build_features, FeatureConfig
from roamkit.exceptions import OutsideInfluenceError, TrainingError

RADIUS = 1.8


@pytest.fixture
def chain():
    centers = np.array([[0.0, 0.0], [2.0, 0.0], [4.0, 0.0]])
    feature_centers = np.zeros((3, 5))
    feature_centers[:, 4] = [0.2, 0.5, 0.8]
    return ClusterModel(
        feature_centers=feature_centers,
        centers=centers,
        influence_radius=RADIUS,
        parent=[1, 2, -1],
        mean_sequence=[0.2, 0.5, 0.8],
        attractor=[4.5, 0.0],
        neighbors=[{1}, {0, 2}, {1}],
    )


def wall_points(rng, x_plane, center, n, y_span=1.2):
    ys = rng.uniform(-y_span, y_span, size=n)
    return np.column_stack([np.full(n, x_plane), ys])


class TestStructure:
    def test_root_and_transparent_walls(self, chain):
        assert chain.root == 2
        assert chain.transparent_wall(0) == 1
        assert chain.transparent_wall(1) == 2
        assert chain.transparent_wall(2) is None

    def test_cycle_rejected(self):
        with pytest.raises(ValueError):
            ClusterModel(
                feature_centers=np.zeros((2, 5)),
                centers=[[0.0, 0.0], [2.0, 0.0]],
                influence_radius=1.0,
                parent=[1, 0],
                mean_sequence=[0.1, 0.2],
                attractor=[2.0, 0.0],
                neighbors=[{1}, {0}],
            )

    def test_sequence_must_increase(self):
        with pytest.raises(ValueError):
            ClusterModel(
                feature_centers=np.zeros((2, 5)),
                centers=[[0.0, 0.0], [2.0, 0.0]],
                influence_radius=1.0,
                parent=[1, -1],
                mean_sequence=[0.9, 0.2],
                attractor=[2.0, 0.0],
                neighbors=[{1}, {0}],
            )

    def test_attractor_must_be_near_root(self):
        with pytest.raises(ValueError):
            ClusterModel(
                feature_centers=np.zeros((2, 5)),
                centers=[[0.0, 0.0], [2.0, 0.0]],
                influence_radius=1.0,
                parent=[1, -1],
                mean_sequence=[0.2, 0.9],
                attractor=[8.0, 0.0],
                neighbors=[{1}, {0}],
            )


class TestPredictCluster:
    def test_center_maps_to_itself(self, chain):
        for o in range(3):
            assert chain.predict_cluster(chain.centers[o]) == o

    def test_far_point_is_none(self, chain):
        assert chain.predict_cluster([0.0, 10.0]) is None
        assert chain.predict_cluster([-5.0, 0.0]) is None

    def test_tie_breaks_to_lower_index(self, chain):
        assert chain.predict_cluster([1.0, 0.0]) == 0
        assert chain.predict_cluster([3.0, 0.0]) == 1


class TestNormalDistance:
    def test_midpoint_is_zero(self, chain):
        assert chain.normal_distance(0, 1, [1.0, 0.7]) == pytest.approx(0.0)

    def test_own_center(self, chain):
        assert chain.normal_distance(0, 1, [0.0, 0.0]) == pytest.approx(-1.0)

    def test_other_center(self, chain):
        assert chain.normal_distance(0, 1, [2.0, 0.0]) == pytest.approx(1.0)


class TestWallIntersection:
    def test_on_plane_is_zero(self, chain):
        assert chain.wall_intersection(0, 1, [1.0, 0.5], [1.0, 0.0]) == pytest.approx(
            0.0
        )

    def test_known_distance(self, chain):
        assert chain.wall_intersection(0, 1, [0.5, 0.0], [1.0, 0.0]) == pytest.approx(
            0.5
        )

    def test_parallel_ray_is_infinite(self, chain):
        assert chain.wall_intersection(0, 1, [0.5, 0.0], [0.0, 1.0]) == np.inf


class TestBoundaryPoint:
    def test_sphere_only_case(self, chain):
        # Query behind cluster 0, away from its single wall: the sphere
        # is the boundary along the radial ray.
        position = np.array([-0.5, 0.0])
        b, boundary = chain.boundary_point(0, position)
        assert b == pytest.approx(RADIUS - 0.5)
        np.testing.assert_allclose(boundary, [-RADIUS, 0.0], atol=1e-12)

    def test_wall_case(self, chain):
        position = np.array([1.5, 0.0])  # inside cluster 1, toward cluster 0
        b, boundary = chain.boundary_point(1, position)
        assert b == pytest.approx(0.5)
        np.testing.assert_allclose(boundary, [1.0, 0.0], atol=1e-12)

    def test_boundary_factor_nonnegative(self, chain):
        rng = np.random.default_rng(0)
        for _ in range(200):
            position = rng.uniform([-1.5, -1.5], [5.5, 1.5])
            cluster = chain.predict_cluster(position)
            if cluster is None:
                continue
            b, _ = chain.boundary_point(cluster, position)
            assert b >= 0.0


class TestProjectPosition:
    def test_boundary_fixed_point(self, chain):
        position = np.array([1.0, 0.2])  # on cluster 0's wall
        projected = chain.project_position(0, position)
        np.testing.assert_allclose(projected, position, atol=1e-9)

    def test_half_radius_doubles(self, chain):
        # Along -x from cluster 0 the boundary is the sphere at RADIUS.
        position = np.array([-RADIUS / 2, 0.0])
        projected = chain.project_position(0, position)
        np.testing.assert_allclose(projected, [-2 * RADIUS, 0.0], atol=1e-12)

    def test_projection_outside_boundary(self, chain):
        rng = np.random.default_rng(1)
        for _ in range(100):
            position = rng.uniform([0.3, -1.0], [1.7, 1.0])
            cluster = chain.predict_cluster(position)
            walls = chain.wall_set(cluster, position)
            d_boundary = np.linalg.norm(walls.boundary_point - chain.centers[cluster])
            d_projected = np.linalg.norm(
                walls.projected_position - chain.centers[cluster]
            )
            assert d_projected >= d_boundary - 1e-12


class TestGammaWeights:
    def test_wall_weight_concentrates(self, chain):
        # On the wall toward cluster 0, far from the other wall.
        weights = chain.gamma_weights(1, [1.0, 0.1])
        assert weights[0] >= 0.95  # neighbor order of cluster 1 is (0, 2)
        assert weights.sum() == pytest.approx(1.0)

    def test_center_puts_weight_on_sphere(self, chain):
        weights = chain.gamma_weights(1, chain.centers[1])
        assert weights[-1] == pytest.approx(1.0)

    def test_simplex_at_random_interior_points(self, chain):
        rng = np.random.default_rng(2)
        checked = 0
        while checked < 1000:
            position = rng.uniform([-1.5, -1.5], [5.5, 1.5])
            cluster = chain.predict_cluster(position)
            if cluster is None:
                continue
            weights = chain.gamma_weights(cluster, position)
            assert weights.min() >= 0
            assert weights.sum() == pytest.approx(1.0)
            checked += 1


class TestGamma:
    def test_solid_wall_is_one(self, chain):
        rng = np.random.default_rng(3)
        # Cluster 1's wall to 0 and cluster 2's wall to 1 are solid.
        for cluster, x_plane in ((1, 1.0), (2, 3.0)):
            for point in wall_points(rng, x_plane, chain.centers[cluster], 50):
                assert chain.gamma(cluster, point) == pytest.approx(1.0, abs=1e-6)

    def test_sphere_boundary_is_one(self, chain):
        rng = np.random.default_rng(4)
        for _ in range(50):
            angle = rng.uniform(0.6 * np.pi, 1.4 * np.pi)  # back side of cluster 0
            point = chain.centers[0] + RADIUS * np.array(
                [np.cos(angle), np.sin(angle)]
            )
            assert chain.gamma(0, point) == pytest.approx(1.0, abs=1e-6)

    def test_center_is_huge(self, chain):
        assert chain.gamma(1, chain.centers[1] + [1e-9, 0.0]) > 1e3
        assert chain.gamma(1, chain.centers[1]) > 1e3

    def test_transparent_wall_is_huge(self, chain):
        rng = np.random.default_rng(5)
        for cluster, x_plane in ((0, 1.0), (1, 3.0)):
            for point in wall_points(rng, x_plane, chain.centers[cluster], 30):
                assert chain.gamma(cluster, point) >= 1e3

    def test_interior_above_one(self, chain):
        rng = np.random.default_rng(6)
        checked = 0
        while checked < 500:
            position = rng.uniform([-1.5, -1.5], [5.5, 1.5])
            cluster = chain.predict_cluster(position)
            if cluster is None:
                continue
            assert chain.gamma(cluster, position) >= 1.0
            checked += 1

    def test_outside_influence_rejected(self, chain):
        with pytest.raises(OutsideInfluenceError):
            chain.gamma(0, [0.0, 5.0])

    def test_continuous_along_path(self, chain):
        # Diagonal path through cluster 1 crossing the wall-0 -> wall-2
        # weight handoff at x = 2 (kept clear of the center pole).
        taus = np.arange(0.0, 1.0, 1e-4)
        start, end = np.array([1.05, 0.9]), np.array([2.95, 0.1])
        gammas = []
        for tau in taus:
            point = start + tau * (end - start)
            assert chain.predict_cluster(point) == 1
            gammas.append(chain.gamma(1, point))
        gammas = np.array(gammas)
        steps = np.abs(np.diff(gammas))
        # Absolute bound in the moderate-gamma zone, relative bound where
        # gamma climbs toward its (continuous) poles.
        moderate = np.minimum(gammas[:-1], gammas[1:]) <= 10.0
        assert steps[moderate].max() < 0.05
        relative = steps / np.minimum(gammas[:-1], gammas[1:])
        assert relative.max() < 0.05


class TestTransparentAdjust:
    def test_zero_transparent_weight_unchanged(self):
        weights = np.array([0.6, 0.0, 0.4])
        adjusted, radius = transparent_adjust(weights, 1, 2.0)
        np.testing.assert_allclose(adjusted, weights)
        assert radius == pytest.approx(2.0)

    def test_full_transparent_weight_saturates(self):
        weights = np.array([0.0, 1.0, 0.0])
        adjusted, radius = transparent_adjust(weights, 1, 2.0, gamma_cap=1e6, scale=1.5)
        np.testing.assert_allclose(adjusted, [0.0, 1.0, 0.0])
        assert radius == pytest.approx(1.5e6)

    def test_adjusted_weights_are_simplex(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            weights = rng.dirichlet(np.ones(4))
            adjusted, _ = transparent_adjust(weights, 2, 1.0)
            assert adjusted.min() >= 0
            assert adjusted.sum() == pytest.approx(1.0)


class TestClusterNormal:
    def test_sphere_only_inward_radial(self, chain):
        # Back side of cluster 0: only the sphere wall is active.
        point = chain.centers[0] + RADIUS * np.array([-1.0, 0.0])
        normal = chain.cluster_normal(0, point)
        np.testing.assert_allclose(normal, [1.0, 0.0], atol=1e-9)

    def test_solid_wall_normal_matches_plane(self, chain):
        # On cluster 1's wall to 0 the hull normal is the into-region
        # plane normal (+x).
        normal = chain.cluster_normal(1, [1.0, 0.3])
        np.testing.assert_allclose(normal, [1.0, 0.0], atol=1e-5)

    def test_unit_everywhere(self, chain):
        rng = np.random.default_rng(8)
        checked = 0
        while checked < 300:
            position = rng.uniform([-1.5, -1.5], [5.5, 1.5])
            cluster = chain.predict_cluster(position)
            if cluster is None:
                continue
            normal = chain.cluster_normal(cluster, position)
            assert np.linalg.norm(normal) == pytest.approx(1.0)
            checked += 1


class TestVoronoiNeighbors:
    def test_single_cluster(self):
        assert voronoi_neighbors(np.zeros((1, 2))) == [set()]

    def test_pair(self):
        assert voronoi_neighbors(np.array([[0.0, 0.0], [1.0, 0.0]])) == [{1}, {0}]

    def test_collinear_chain(self):
        centers = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [3.0, 0.0]])
        neighbors = voronoi_neighbors(centers)
        assert neighbors == [{1}, {0, 2}, {1, 3}, {2}]

    def test_triangle_all_adjacent(self):
        centers = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, 1.0]])
        neighbors = voronoi_neighbors(centers)
        assert neighbors == [{1, 2}, {0, 2}, {0, 1}]

    def test_square_grid_no_diagonal_through_gap(self):
        # 3x1 line plus an offset point: farthest pair not adjacent.
        centers = np.array([[0.0, 0.0], [2.0, 0.0], [4.0, 0.0], [2.0, 2.0]])
        neighbors = voronoi_neighbors(centers)
        assert 2 not in neighbors[0]


class TestBuildHierarchy:
    def test_single_cluster(self):
        parent = build_hierarchy([0.5], [set()])
        np.testing.assert_array_equal(parent, [-1])

    def test_chain(self):
        parent = build_hierarchy([0.2, 0.5, 0.8], [{1}, {0, 2}, {1}])
        np.testing.assert_array_equal(parent, [1, 2, -1])

    def test_disconnected_raises(self):
        # Cluster 0's only neighbor has a smaller mean sequence.
        with pytest.raises(TrainingError, match="disconnected"):
            build_hierarchy([0.5, 0.2, 0.8], [{1}, {0}, set()])

    def test_picks_smallest_greater_sequence(self):
        parent = build_hierarchy([0.1, 0.9, 0.5], [{1, 2}, {0, 2}, {0, 1}])
        assert parent[0] == 2  # 0.5 beats 0.9 as the next step


def straight_line_demos(n_demos=3, n=120):
    demos = []
    for demo_id in range(n_demos):
        t = np.linspace(0.0, 1.0, n)
        y = 0.05 * (demo_id - 1)
        positions = np.column_stack([6.0 * t, np.full(n, y)])
        demos.append(Demonstration(demo_id, t, positions))
    return demos


class TestFitClusterModel:
    def test_three_cluster_chain_from_straight_demos(self):
        features = build_features(straight_line_demos())
        model, labels = fit_cluster_model(features, 3, seed=0, feature_config=FeatureConfig())
        order = np.argsort(model.centers[:, 0])
        # Chain along x: each cluster parents the next one to the right.
        assert model.parent[order[0]] == order[1]
        assert model.parent[order[1]] == order[2]
        assert model.parent[order[2]] == -1
        assert labels.shape == (features.n_samples,)

    def test_deterministic(self):
        features = build_features(straight_line_demos())
        a, labels_a = fit_cluster_model(features, 3, seed=5, feature_config=FeatureConfig())
        b, labels_b = fit_cluster_model(features, 3, seed=5, feature_config=FeatureConfig())
        np.testing.assert_array_equal(a.centers, b.centers)
        np.testing.assert_array_equal(labels_a, labels_b)
        np.testing.assert_array_equal(a.parent, b.parent)

    def test_attractor_near_demo_ends(self):
        features = build_features(straight_line_demos())
        model, _ = fit_cluster_model(features, 2, seed=0, feature_config=FeatureConfig())
        assert np.linalg.norm(model.attractor - np.array([6.0, 0.0])) < 0.2
