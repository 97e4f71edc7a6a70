"""Unit-direction arithmetic on the sphere of velocity directions.

All rotation-based avoidance reduces to a handful of operations on unit
vectors: geodesic interpolation between two directions, signed planar
rotation, and weighted means of directions taken in the tangent space of
a null direction.  Everything here is dimension-generic unless the name
says ``2d``.
"""

import math

import numpy as np

from .exceptions import DegenerateDirectionError

# Inputs closer than this to antipodal are rejected; the rotation plane
# would be arbitrary.
ANTIPODAL_TOL = 1e-9

_PARALLEL_TOL = 1e-12


def unit(vector, name="vector"):
    """Normalize ``vector`` to unit length.

    Raises
    ------
    ValueError
        If the vector has (near-)zero norm and no direction.
    """
    arr = np.asarray(vector, dtype=float)
    norm = math.sqrt(float(arr @ arr))
    if norm < _PARALLEL_TOL:
        raise ValueError(f"{name} has zero norm; direction undefined")
    return arr / norm


def angle_between(a, b):
    """Angle in [0, pi] between two unit directions.

    The dot product is clamped to [-1, 1], so slightly denormalized
    inputs never produce NaN.
    """
    dot = float(np.dot(a, b))
    return math.acos(max(-1.0, min(1.0, dot)))


def geodesic_interpolate(a, b, w):
    """Point at fraction ``w`` along the great-circle arc from ``a`` to ``b``.

    Parameters
    ----------
    a, b : ndarray
        Unit directions with angle(a, b) < pi.
    w : float
        Arc fraction in [0, 1]; 0 returns ``a``, 1 returns ``b``.

    Raises
    ------
    DegenerateDirectionError
        For antipodal inputs, where the arc is not unique.
    """
    if not 0.0 <= w <= 1.0:
        raise ValueError(f"interpolation fraction must be in [0, 1], got {w}")
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    theta = angle_between(a, b)
    if theta > np.pi - ANTIPODAL_TOL:
        raise DegenerateDirectionError(
            "cannot interpolate between antipodal directions"
        )
    if theta < 1e-12:
        return unit((1.0 - w) * a + w * b)
    out = (math.sin((1.0 - w) * theta) * a + math.sin(w * theta) * b) / math.sin(
        theta
    )
    return out / math.sqrt(float(out @ out))


def rotate_in_plane_2d(direction, angle):
    """Rotate a 2-D unit direction counter-clockwise by ``angle`` radians."""
    direction = np.asarray(direction, dtype=float)
    if direction.shape != (2,):
        raise ValueError("rotate_in_plane_2d requires a 2-D direction")
    c, s = math.cos(angle), math.sin(angle)
    out = np.array(
        [c * direction[0] - s * direction[1], s * direction[0] + c * direction[1]]
    )
    return out / math.sqrt(float(out @ out))


def signed_angle_2d(a, b):
    """Signed angle in (-pi, pi] that rotates unit ``a`` onto unit ``b``.

    Positive values are counter-clockwise.
    """
    cross = a[0] * b[1] - a[1] * b[0]
    dot = a[0] * b[0] + a[1] * b[1]
    angle = math.atan2(cross, dot)
    if angle <= -np.pi:
        angle = np.pi
    return angle


def directional_weighted_mean(null_direction, directions, weights):
    """Weighted mean of unit directions in the tangent space at a null direction.

    Each direction is mapped into the tangent hyperplane at
    ``null_direction`` by the angle-scaled logarithmic map, averaged with
    Euclidean weights (the null direction itself maps to the origin, so
    residual weight ``1 - sum(weights)`` pulls the result toward it), and
    mapped back with the exponential map.

    Parameters
    ----------
    null_direction : ndarray
        Unit direction receiving the residual weight.
    directions : sequence of ndarray
        Unit directions, each within angle < pi of ``null_direction``.
    weights : sequence of float
        Nonnegative weights with total at most 1.

    Raises
    ------
    DegenerateDirectionError
        If a direction with positive weight is antipodal to the null
        direction.
    """
    null_direction = np.asarray(null_direction, dtype=float)
    if len(directions) != len(weights):
        raise ValueError("directions and weights must have equal length")
    total = float(np.sum(weights)) if len(weights) else 0.0
    if total > 1.0 + 1e-9:
        raise ValueError(f"weights must sum to at most 1, got {total}")

    tangent_sum = np.zeros_like(null_direction)
    for direction, weight in zip(directions, weights):
        if weight < 0:
            raise ValueError("weights must be nonnegative")
        if weight == 0.0:
            continue
        direction = np.asarray(direction, dtype=float)
        theta = angle_between(null_direction, direction)
        if theta > np.pi - ANTIPODAL_TOL:
            raise DegenerateDirectionError(
                "direction antipodal to the null direction"
            )
        planar = direction - math.cos(theta) * null_direction
        planar_norm = math.sqrt(float(planar @ planar))
        if planar_norm < 1e-15:
            continue  # parallel to null direction, log map is zero
        tangent_sum += weight * theta * (planar / planar_norm)

    magnitude = math.sqrt(float(tangent_sum @ tangent_sum))
    if magnitude < 1e-15:
        return null_direction.copy()
    out = math.cos(magnitude) * null_direction + math.sin(magnitude) * (
        tangent_sum / magnitude
    )
    return out / math.sqrt(float(out @ out))


def orthogonal_direction(vector):
    """Deterministic unit direction orthogonal to ``vector``.

    Uses the coordinate axis least aligned with ``vector``, so repeated
    calls on the same input always agree.  Basis for the fixed
    perturbation applied at antipodal/parallel degeneracies.
    """
    v = unit(vector)
    axis = int(np.argmin(np.abs(v)))
    candidate = np.zeros_like(v)
    candidate[axis] = 1.0
    candidate -= np.dot(candidate, v) * v
    return candidate / np.linalg.norm(candidate)


def perturb_direction(direction, reference, epsilon):
    """Nudge ``direction`` off the singular set around ``reference``.

    Adds a fixed offset of size ``epsilon`` along the deterministic
    orthogonal of ``reference`` and renormalizes.
    """
    return unit(np.asarray(direction, float) + epsilon * orthogonal_direction(reference))
