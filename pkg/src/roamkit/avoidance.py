"""Obstacle avoidance engines.

Two engines share the same obstacle queries:

* ``ModulationAvoider`` -- the baseline matrix modulation
  ``M = E diag(l_r, l_e, ...) E^-1`` built from the reference direction
  and the surface tangent basis.
* ``RotationalAvoider`` -- rotation-based avoidance: find a tangent
  guiding around each obstacle, rotate the initial direction toward it
  by a distance- and alignment-dependent weight, and keep the speed of
  the initial dynamics unchanged.
"""

import math
from dataclasses import dataclass

import numpy as np

from .directional import (
    ANTIPODAL_TOL,
    directional_weighted_mean,
    geodesic_interpolate,
    perturb_direction,
    unit,
)
from .dynamics import convergence_direction
from .exceptions import PenetrationError, ZeroVelocityError
from .validation import as_point

_PENETRATION_TOL = 1e-9
_SURFACE_TOL = 1e-12


@dataclass
class RoamParams:
    """Tuning knobs of the rotational engine.

    smoothness_exponent
        Exponent on ``|r - d_c|`` in the convergence weight; larger
        values sharpen the transition between avoiding and following.
    gamma_cap
        Gamma values are clamped here before weights are computed;
        influence below the corresponding weight is numerically
        irrelevant.
    antipodal_epsilon
        Size of the deterministic perturbation applied when a direction
        falls on a singular configuration (parallel to a normal or
        antipodal to another direction).
    tangent_from_initial
        Compute the guiding tangent from the initial direction instead
        of the convergence direction (alternative resolution for
        nonlinear initial dynamics).
    linear_combination
        Replace geodesic rotation by the literal convex combination of
        direction vectors followed by renormalization (ablation flag).
    """

    smoothness_exponent: float = 3.0
    gamma_cap: float = 1e6
    antipodal_epsilon: float = 1e-6
    tangent_from_initial: bool = False
    linear_combination: bool = False

    def __post_init__(self):
        if self.smoothness_exponent <= 0:
            raise ValueError("smoothness_exponent must be > 0")


def compute_tangent(normal, toward, epsilon=1e-6):
    """Direction in the collision-free half space closest to ``toward``.

    Projects ``toward`` onto the tangent hyperplane of ``normal``; a
    (anti)parallel ``toward`` is first perturbed deterministically so the
    result is always defined.
    """
    toward = np.asarray(toward, dtype=float)
    normal = np.asarray(normal, dtype=float)
    projected = toward - float(toward @ normal) * normal
    norm = math.sqrt(float(projected @ projected))
    if norm < ANTIPODAL_TOL:
        toward = perturb_direction(toward, normal, epsilon)
        projected = toward - float(toward @ normal) * normal
        norm = math.sqrt(float(projected @ projected))
    return projected / norm


def convergence_weight(gamma, reference_dir, convergence_dir, params=None):
    """Rotation weight in [0, 1] toward the tangent.

    ``w = (1 / gamma) ** (1 / |r - d_c|**c_s)`` with the limit
    conventions: full weight on the surface (gamma = 1) and zero weight
    when the alignment factor vanishes away from the surface.
    """
    if params is None:
        params = RoamParams()
    if gamma < 1.0 - _PENETRATION_TOL:
        raise ValueError(f"convergence weight requires gamma >= 1, got {gamma}")
    w_gamma = 1.0 / min(max(gamma, 1.0), params.gamma_cap)
    if w_gamma >= 1.0 - _SURFACE_TOL:
        return 1.0
    gap = np.asarray(reference_dir) - np.asarray(convergence_dir)
    w_smooth = math.sqrt(float(gap @ gap)) ** params.smoothness_exponent
    if w_smooth <= 1e-12:
        return 0.0
    return float(w_gamma ** (1.0 / w_smooth))


def influence_weights(gammas, gamma_cap=1e6, normalize=False):
    """Per-obstacle weights from surface distances ``gamma - 1``.

    Raw weights are ``1 / (gamma - 1)`` so the nearest obstacle
    dominates; obstacles on their surface receive the full mass split
    equally.  With ``normalize=False`` the total is only clamped to 1,
    leaving residual mass (used by the rotational combination, where the
    remainder stays on the initial direction).
    """
    gammas = np.minimum(np.asarray(gammas, dtype=float), gamma_cap)
    if gammas.shape[0] == 1:
        distance = float(gammas[0]) - 1.0
        if distance < 1e-12:
            return np.ones(1)
        return np.array([min(1.0 / distance, 1.0) if not normalize else 1.0])
    distances = gammas - 1.0
    on_surface = distances < 1e-12
    if np.any(on_surface):
        weights = on_surface.astype(float)
        return weights / weights.sum()
    weights = 1.0 / distances
    total = weights.sum()
    if normalize or total > 1.0:
        weights = weights / total
    return weights


class ModulationAvoider:
    """Baseline modulation-matrix avoidance."""

    def __init__(self, obstacles, dynamics):
        self.obstacles = list(obstacles)
        self.dynamics = dynamics

    def evaluate(self, position):
        position = as_point(position)
        return self.avoid(position, self.dynamics.evaluate(position))

    def avoid(self, position, velocity):
        """Apply the modulation of every obstacle to ``velocity``.

        Single obstacle: exactly ``M(xi) velocity``.  Several obstacles:
        per-obstacle modulations averaged with gamma-based weights.
        """
        position = as_point(position)
        velocity = np.asarray(velocity, dtype=float)
        if not self.obstacles:
            return velocity.copy()
        gammas = _checked_gammas(self.obstacles, position)
        weights = influence_weights(gammas, normalize=True)
        out = np.zeros_like(velocity)
        for obstacle, gamma, weight in zip(self.obstacles, gammas, weights):
            if weight == 0.0:
                continue
            out += weight * self._modulate_single(obstacle, gamma, position, velocity)
        return out

    def _modulate_single(self, obstacle, gamma, position, velocity):
        reference = obstacle.reference_direction(position)
        normal = obstacle.normal(position)
        basis = np.empty((position.shape[0],) * 2)
        basis[:, 0] = reference
        basis[:, 1:] = _tangent_basis(normal)
        inv_gamma = 1.0 / max(gamma, 1.0)
        eigenvalues = np.full(position.shape[0], 1.0 + inv_gamma)
        eigenvalues[0] = 1.0 - inv_gamma
        coefficients = np.linalg.solve(basis, velocity)
        return basis @ (eigenvalues * coefficients)


class RotationalAvoider:
    """Rotation-based avoidance (magnitude-preserving)."""

    def __init__(self, obstacles, dynamics, params=None):
        self.obstacles = list(obstacles)
        self.dynamics = dynamics
        self.params = params if params is not None else RoamParams()

    def evaluate(self, position):
        position = as_point(position)
        velocity = self.dynamics.evaluate(position)
        speed = math.sqrt(float(velocity @ velocity))
        if speed < 1e-12:
            attractor = getattr(self.dynamics, "attractor", None)
            if attractor is not None and np.linalg.norm(position - attractor) < 1e-9:
                return np.zeros_like(velocity)
            raise ZeroVelocityError(
                f"initial dynamics vanish away from the attractor at {position}"
            )
        if not self.obstacles:
            return velocity.copy()
        direction = self.rotate_direction(position, velocity / speed)
        return speed * direction

    def rotate_direction(self, position, initial_direction):
        """Unit output direction for unit ``initial_direction`` at ``position``."""
        params = self.params
        gammas = _checked_gammas(self.obstacles, position)
        if len(self.obstacles) == 1 and not params.linear_combination:
            return self._rotate_single(
                position, initial_direction, float(gammas[0]), self.obstacles[0]
            )
        d_conv = convergence_direction(self.dynamics, position, initial_direction)
        if d_conv is None:
            d_conv = initial_direction

        rotated = []
        for obstacle, gamma in zip(self.obstacles, gammas):
            normal = obstacle.normal(position)
            reference = obstacle.reference_direction(position)
            toward = initial_direction if params.tangent_from_initial else d_conv
            tangent = compute_tangent(normal, toward, params.antipodal_epsilon)
            weight = convergence_weight(gamma, reference, d_conv, params)
            rotated.append(
                _rotate_toward(initial_direction, tangent, weight, params)
            )

        weights = influence_weights(gammas, params.gamma_cap)
        rotated = [
            _resolve_antipodal(initial_direction, d, params.antipodal_epsilon)
            for d in rotated
        ]
        if len(rotated) == 1:
            return _rotate_toward(
                initial_direction, rotated[0], float(weights[0]), params
            )
        return directional_weighted_mean(initial_direction, rotated, weights)

    def _rotate_single(self, position, initial_direction, gamma, obstacle):
        """Single-obstacle fast path: the rotation toward the tangent and
        the influence-weighted pull back toward the initial direction run
        along the same geodesic, so their fractions compose by product."""
        params = self.params
        d_conv = convergence_direction(self.dynamics, position, initial_direction)
        if d_conv is None:
            d_conv = initial_direction
        normal = obstacle.normal(position)
        reference = obstacle.reference_direction(position)
        toward = initial_direction if params.tangent_from_initial else d_conv
        tangent = compute_tangent(normal, toward, params.antipodal_epsilon)
        weight = convergence_weight(gamma, reference, d_conv, params)
        distance = min(gamma, params.gamma_cap) - 1.0
        influence = 1.0 if distance < 1e-12 else min(1.0 / distance, 1.0)
        return _rotate_toward(initial_direction, tangent, weight * influence, params)


def _rotate_toward(from_dir, to_dir, weight, params):
    if params.linear_combination:
        combined = weight * to_dir + (1.0 - weight) * from_dir
        norm = np.linalg.norm(combined)
        if norm < ANTIPODAL_TOL:
            to_dir = perturb_direction(to_dir, from_dir, params.antipodal_epsilon)
            combined = weight * to_dir + (1.0 - weight) * from_dir
            norm = np.linalg.norm(combined)
        return combined / norm
    try:
        return geodesic_interpolate(from_dir, to_dir, weight)
    except Exception:
        to_dir = perturb_direction(to_dir, from_dir, params.antipodal_epsilon)
        return geodesic_interpolate(from_dir, to_dir, weight)


def _resolve_antipodal(null_direction, direction, epsilon):
    if np.dot(null_direction, direction) < -1.0 + ANTIPODAL_TOL:
        return perturb_direction(direction, null_direction, epsilon)
    return direction


def _checked_gammas(obstacles, position):
    gammas = []
    for index, obstacle in enumerate(obstacles):
        gamma = obstacle.gamma(position)
        if gamma < 1.0 - _PENETRATION_TOL:
            raise PenetrationError(index, gamma)
        gammas.append(max(gamma, 1.0))
    return np.asarray(gammas)


def _tangent_basis(normal):
    """Orthonormal basis of the hyperplane orthogonal to ``normal``."""
    normal = np.asarray(normal, dtype=float)
    d = normal.shape[0]
    if d == 2:
        return np.array([[-normal[1]], [normal[0]]])
    # Householder reflection mapping e_0 to the normal: remaining columns
    # span the tangent space.
    sign = 1.0 if normal[0] >= 0 else -1.0
    v = normal.copy()
    v[0] += sign
    v /= np.linalg.norm(v)
    basis = np.eye(d) - 2.0 * np.outer(v, v)
    return basis[:, 1:]
