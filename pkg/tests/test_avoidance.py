"""Avoidance engine tests.

The hand-evaluated modulation case: circle of radius 1 at the origin,
query (-2, 0), f = (1, 0).  There gamma = 4, the basis is axis-aligned,
and M = diag(1 - 1/4, 1 + 1/4), so the output is (0.75, 0).
"""

import numpy as np
import pytest

from roamkit.avoidance import (
    ModulationAvoider,
    RoamParams,
    RotationalAvoider,
    compute_tangent,
    convergence_weight,
    influence_weights,
)
from roamkit.directional import angle_between, unit
from roamkit.dynamics import CallableDynamics, LinearDynamics
from roamkit.exceptions import PenetrationError, ZeroVelocityError
from roamkit.obstacles import Ellipse, StarPolygon, invert


def unit_circle(radius=1.0, center=(0.0, 0.0)):
    return Ellipse(center=list(center), semi_axes=[radius, radius])


class TestComputeTangent:
    def test_orthogonal_unchanged(self):
        normal = np.array([1.0, 0.0])
        toward = np.array([0.0, 1.0])
        np.testing.assert_allclose(compute_tangent(normal, toward), toward)

    def test_projection(self):
        normal = np.array([1.0, 0.0])
        toward = np.array([-np.sqrt(2) / 2, np.sqrt(2) / 2])
        np.testing.assert_allclose(
            compute_tangent(normal, toward), [0.0, 1.0], atol=1e-12
        )

    def test_always_orthogonal_to_normal(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            normal = unit(rng.normal(size=2))
            toward = unit(rng.normal(size=2))
            tangent = compute_tangent(normal, toward)
            assert abs(np.dot(tangent, normal)) < 1e-9

    def test_parallel_resolved_deterministically(self):
        normal = np.array([1.0, 0.0])
        a = compute_tangent(normal, normal.copy())
        b = compute_tangent(normal, normal.copy())
        np.testing.assert_array_equal(a, b)
        assert abs(np.dot(a, normal)) < 1e-9


class TestConvergenceWeight:
    def test_surface_dominance(self):
        r = np.array([1.0, 0.0])
        d = np.array([0.0, 1.0])
        assert convergence_weight(1.0, r, d) == 1.0

    def test_monotone_decreasing_in_gamma(self):
        r = np.array([1.0, 0.0])
        d = np.array([-1.0, 0.0])
        weights = [convergence_weight(g, r, d) for g in (1.0, 2.0, 10.0, 1e3, 1e6)]
        assert np.all(np.diff(weights) < 0)
        # Head-on decay is slow (exponent 1/8 for c_s = 3); a unit
        # smoothing distance decays like 1/gamma itself.
        d_oblique = np.array([0.5, np.sqrt(3) / 2])
        assert convergence_weight(1e3, r, d_oblique) == pytest.approx(1e-3)

    def test_unit_smoothing_distance(self):
        # |r - d| = 1 makes the smoothing weight 1 for any exponent.
        r = np.array([1.0, 0.0])
        d = np.array([0.5, np.sqrt(3) / 2])
        for exponent in (1.0, 3.0, 7.0):
            params = RoamParams(smoothness_exponent=exponent)
            assert convergence_weight(2.0, r, d, params) == pytest.approx(0.5)

    def test_aligned_reference_gives_zero(self):
        r = np.array([1.0, 0.0])
        assert convergence_weight(2.0, r, r.copy()) == 0.0

    def test_penetration_rejected(self):
        r = np.array([1.0, 0.0])
        with pytest.raises(ValueError):
            convergence_weight(0.5, r, -r)


class TestInfluenceWeights:
    def test_far_obstacles_leave_residual(self):
        weights = influence_weights([1e3, 2e3])
        assert weights.sum() < 0.01

    def test_near_surface_dominates(self):
        weights = influence_weights([1.0 + 1e-13, 5.0])
        np.testing.assert_allclose(weights, [1.0, 0.0])

    def test_normalized_mode_sums_to_one(self):
        weights = influence_weights([4.0, 7.0, 100.0], normalize=True)
        assert weights.sum() == pytest.approx(1.0)


class TestModulationAvoider:
    def test_no_obstacles_identity(self):
        avoider = ModulationAvoider([], LinearDynamics([0.0, 0.0]))
        np.testing.assert_allclose(avoider.evaluate([1.0, 2.0]), [-1.0, -2.0])

    def test_hand_evaluated_case(self):
        avoider = ModulationAvoider(
            [unit_circle()], CallableDynamics(lambda xi: np.array([1.0, 0.0]))
        )
        out = avoider.evaluate([-2.0, 0.0])
        np.testing.assert_allclose(out, [0.75, 0.0], atol=1e-12)

    def test_surface_kills_normal_component(self):
        circle = unit_circle()
        avoider = ModulationAvoider(
            [circle], CallableDynamics(lambda xi: np.array([1.0, 0.0]))
        )
        surface = np.array([-1.0, 0.0])
        out = avoider.avoid(surface, np.array([1.0, 0.0]))
        assert abs(np.dot(out, circle.normal(surface))) < 1e-12

    def test_penetration_error_carries_index(self):
        avoider = ModulationAvoider(
            [unit_circle(), unit_circle(center=(5.0, 0.0))],
            LinearDynamics([0.0, 3.0]),
        )
        with pytest.raises(PenetrationError) as excinfo:
            avoider.evaluate([5.0, 0.2])
        assert excinfo.value.obstacle_index == 1


class TestRotationalAvoider:
    def test_no_obstacles_identity(self):
        avoider = RotationalAvoider([], LinearDynamics([1.0, 1.0], gain=2.0))
        np.testing.assert_allclose(avoider.evaluate([0.0, 0.0]), [2.0, 2.0])

    def test_magnitude_preserved(self):
        dynamics = LinearDynamics([2.0, 1.0], gain=1.3)
        avoider = RotationalAvoider(
            [unit_circle(), unit_circle(radius=0.5, center=(-2.0, -1.0))], dynamics
        )
        rng = np.random.default_rng(1)
        checked = 0
        while checked < 1000:
            point = rng.uniform(-6, 6, size=2)
            if (
                min(o.gamma(point) for o in avoider.obstacles) < 1.0
                or np.linalg.norm(dynamics.evaluate(point)) < 1e-9
            ):
                continue
            out = avoider.evaluate(point)
            expected = np.linalg.norm(dynamics.evaluate(point))
            assert abs(np.linalg.norm(out) - expected) < 1e-9 * max(expected, 1.0)
            checked += 1

    def test_surface_tangency_head_on(self):
        circle = unit_circle()
        avoider = RotationalAvoider([circle], LinearDynamics([5.0, 0.0]))
        surface = np.array([-1.0, 0.0])
        out = avoider.evaluate(surface)
        assert np.dot(out, circle.normal(surface)) >= -1e-9
        assert abs(np.dot(unit(out), circle.normal(surface))) < 1e-6

    def test_far_field_fidelity(self):
        dynamics = LinearDynamics([0.0, 0.0])
        avoider = RotationalAvoider([unit_circle(center=(200.0, 0.0))], dynamics)
        rng = np.random.default_rng(2)
        for _ in range(50):
            point = rng.uniform(-3, 3, size=2) + np.array([120.0, 50.0])
            if np.linalg.norm(dynamics.evaluate(point)) < 1e-9:
                continue
            assert avoider.obstacles[0].gamma(point) >= 1e3
            out = avoider.evaluate(point)
            assert angle_between(unit(out), unit(dynamics.evaluate(point))) <= 1e-2

    def test_attractor_fixed_point(self):
        avoider = RotationalAvoider(
            [unit_circle(center=(4.0, 0.0))], LinearDynamics([0.0, 0.0])
        )
        np.testing.assert_allclose(avoider.evaluate([0.0, 0.0]), [0.0, 0.0])

    def test_zero_velocity_away_from_attractor(self):
        stuck = CallableDynamics(lambda xi: np.zeros(2))
        avoider = RotationalAvoider([unit_circle(center=(5.0, 5.0))], stuck)
        with pytest.raises(ZeroVelocityError):
            avoider.evaluate([1.0, 1.0])

    def test_inside_hull(self):
        hull = invert(Ellipse(center=[0, 0], semi_axes=[4.0, 3.0]))
        avoider = RotationalAvoider([hull], LinearDynamics([1.0, 0.0]))
        out = avoider.evaluate([-2.0, 1.0])
        assert np.linalg.norm(out) > 0
        # On the hull wall the flow must not push outward.
        wall = hull.surface_point(np.array([0.0, 1.0]))
        out_wall = avoider.evaluate(wall)
        assert np.dot(out_wall, hull.normal(wall)) >= -1e-9


class TestContinuity:
    def test_numerical_lipschitz_bound(self):
        obstacles = [
            unit_circle(),
            StarPolygon(
                np.array(
                    [[2.5, 1.0], [1.5, 1.5], [0.5, 1.0], [1.0, 2.0], [1.5, 3.0], [2.5, 2.0]]
                )
                + np.array([1.0, 1.0])
            ),
        ]
        dynamics = LinearDynamics([-3.0, -3.0])
        engines = [
            ModulationAvoider(obstacles, dynamics),
            RotationalAvoider(obstacles, dynamics),
        ]
        rng = np.random.default_rng(3)
        delta = 1e-6
        for engine in engines:
            checked = 0
            while checked < 1000:
                point = rng.uniform(-6, 6, size=2)
                if min(o.gamma(point) for o in obstacles) < 1.001:
                    continue
                step = unit(rng.normal(size=2)) * delta
                if min(o.gamma(point + step) for o in obstacles) < 1.0:
                    continue
                if np.linalg.norm(dynamics.evaluate(point)) < 1e-6:
                    continue
                a = engine.evaluate(point)
                b = engine.evaluate(point + step)
                assert np.linalg.norm(a - b) <= 1e3 * delta
                checked += 1
