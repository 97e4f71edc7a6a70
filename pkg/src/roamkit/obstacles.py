"""Star-shaped obstacle geometry.

Obstacles expose four queries used by every avoidance engine:

* ``boundary_radius`` -- distance from the reference point to the surface
  along the ray through a query point,
* ``gamma`` -- scalar distance value (< 1 inside, 1 on the surface,
  > 1 outside, growing along rays from the reference point),
* ``normal`` -- outward unit normal of the gamma level set,
* ``reference_direction`` -- unit vector from the reference point to the
  query point.

``BoundaryObstacle`` wraps any star obstacle into an enclosing hull:
gamma becomes the reciprocal and both directions flip sign, so free
space is the inside and the same engines apply unchanged.
"""

import math

import numpy as np

from .directional import geodesic_interpolate, unit
from .validation import as_point, check_positive

_CENTER_TOL = 1e-12

# Polygon normals are blended over a small arc around each vertex so the
# combined field stays continuously differentiable.
_VERTEX_BLEND_HALF_ANGLE = np.deg2rad(2.5)


class StarObstacle:
    """Base class for star-shaped obstacles.

    Parameters
    ----------
    center : array-like
        Geometric center.
    reference_point : array-like, optional
        Kernel point all rays are cast from; defaults to the center and
        must lie strictly inside the obstacle.
    distance_power : int
        Positive exponent ``p``; gamma is ``(|xi - ref| / R(xi))**(2p)``.
    margin : float
        Clearance added to the boundary radius before gamma evaluation.
    """

    is_boundary = False

    def __init__(self, center, reference_point=None, distance_power=1, margin=0.0):
        self.center = as_point(center, name="center")
        if reference_point is None:
            self.reference_point = self.center.copy()
        else:
            self.reference_point = as_point(
                reference_point, dim=self.center.shape[0], name="reference_point"
            )
        if int(distance_power) < 1:
            raise ValueError("distance_power must be a positive integer")
        self.distance_power = int(distance_power)
        if margin < 0:
            raise ValueError("margin must be >= 0")
        self.margin = float(margin)

    @property
    def dimension(self):
        return self.center.shape[0]

    # -- queries ---------------------------------------------------------

    def boundary_radius(self, position):
        """Distance from the reference point to the surface along the ray
        through ``position`` (margin included)."""
        offset = np.asarray(position, dtype=float) - self.reference_point
        distance = math.sqrt(float(offset @ offset))
        if distance < _CENTER_TOL:
            raise ValueError("boundary radius undefined at the reference point")
        return self._base_radius(offset / distance) + self.margin

    def gamma(self, position):
        """Distance value: < 1 inside, 1 on the surface, > 1 outside.

        Returns 0 at the reference point by continuity convention.
        """
        offset = np.asarray(position, dtype=float) - self.reference_point
        distance = math.sqrt(float(offset @ offset))
        if distance < _CENTER_TOL:
            return 0.0
        radius = self._base_radius(offset / distance) + self.margin
        return (distance / radius) ** (2 * self.distance_power)

    def reference_direction(self, position):
        """Unit vector from the reference point toward ``position``."""
        offset = np.asarray(position, dtype=float) - self.reference_point
        distance = math.sqrt(float(offset @ offset))
        if distance < _CENTER_TOL:
            raise ValueError("reference direction undefined at the reference point")
        return offset / distance

    def normal(self, position):
        raise NotImplementedError

    def surface_point(self, direction):
        """Point on the gamma = 1 surface along unit ``direction``."""
        direction = unit(direction)
        return self.reference_point + (
            self._base_radius(direction) + self.margin
        ) * direction

    def outline(self, n=128):
        """Closed polyline sampling of the surface (2-D only)."""
        if self.dimension != 2:
            raise ValueError("outline is only defined for 2-D obstacles")
        angles = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
        points = np.array(
            [self.surface_point(np.array([np.cos(a), np.sin(a)])) for a in angles]
        )
        return np.vstack([points, points[:1]])

    def _base_radius(self, direction):
        """Margin-free boundary radius along unit ``direction``."""
        raise NotImplementedError


class Ellipse(StarObstacle):
    """Axis-scaled, optionally rotated ellipse (any dimension >= 2).

    ``orientation`` is the counter-clockwise rotation angle in radians
    and only applies in 2-D.
    """

    def __init__(
        self,
        center,
        semi_axes,
        orientation=0.0,
        reference_point=None,
        distance_power=1,
        margin=0.0,
    ):
        super().__init__(center, reference_point, distance_power, margin)
        self.semi_axes = np.asarray(semi_axes, dtype=float)
        if self.semi_axes.shape != (self.dimension,):
            raise ValueError("semi_axes must match the center dimension")
        if np.any(self.semi_axes <= 0):
            raise ValueError("semi_axes must be positive")
        self.orientation = float(orientation)
        if self.dimension == 2:
            c, s = np.cos(self.orientation), np.sin(self.orientation)
            self._rotation = np.array([[c, -s], [s, c]])
        else:
            if abs(self.orientation) > 0:
                raise ValueError("orientation is only supported in 2-D")
            self._rotation = np.eye(self.dimension)
        self._axis_aligned = self.orientation == 0.0
        # Reference point must be strictly inside the (margin-free) surface.
        self._offset_scaled = self._scaled(self.reference_point - self.center)
        level = np.linalg.norm(self._offset_scaled)
        if level >= 1.0 - 1e-12:
            raise ValueError("reference_point must lie strictly inside the ellipse")

    def _scaled(self, vector):
        """Map a world-frame offset into the unit-sphere frame."""
        if self._axis_aligned:
            return vector / self.semi_axes
        return (self._rotation.T @ vector) / self.semi_axes

    def _unscale_transpose(self, vector):
        """Apply the transpose of the scaling map (for gradients)."""
        if self._axis_aligned:
            return vector / self.semi_axes
        return self._rotation @ (vector / self.semi_axes)

    def _base_radius(self, direction):
        v = self._scaled(direction)
        w = self._offset_scaled
        vv = float(v @ v)
        wv = float(w @ v)
        disc = wv * wv + vv * (1.0 - float(w @ w))
        # reference strictly inside => discriminant > 0, one positive root
        return (-wv + math.sqrt(disc)) / vv

    def normal(self, position):
        """Outward unit normal of the gamma level set (analytic gradient)."""
        offset = np.asarray(position, dtype=float) - self.reference_point
        distance = math.sqrt(float(offset @ offset))
        if distance < _CENTER_TOL:
            raise ValueError("normal undefined at the reference point")
        direction = offset / distance
        radius = self._base_radius(direction)
        v = self._scaled(direction)
        q = self._offset_scaled + radius * v
        # Implicit differentiation of |w + R v(u)|^2 = 1 with respect to
        # the ray direction u, projected to the sphere tangent at u.
        grad_u = -radius * self._unscale_transpose(q) / float(q @ v)
        grad_u_tangent = grad_u - float(grad_u @ direction) * direction
        gradient = (radius + self.margin) * direction - grad_u_tangent
        return gradient / math.sqrt(float(gradient @ gradient))


class StarPolygon(StarObstacle):
    """Simple 2-D polygon that is star-shaped about its reference point."""

    def __init__(
        self,
        vertices,
        reference_point=None,
        center=None,
        distance_power=1,
        margin=0.0,
    ):
        vertices = np.asarray(vertices, dtype=float)
        if vertices.ndim != 2 or vertices.shape[1] != 2 or vertices.shape[0] < 3:
            raise ValueError("vertices must be an (m, 2) array with m >= 3")
        if center is None:
            center = vertices.mean(axis=0)
        super().__init__(center, reference_point, distance_power, margin)
        # Normalize to counter-clockwise order.
        rolled = np.roll(vertices, -1, axis=0)
        signed_area = 0.5 * np.sum(
            vertices[:, 0] * rolled[:, 1] - rolled[:, 0] * vertices[:, 1]
        )
        if signed_area < 0:
            vertices = vertices[::-1].copy()
        self.vertices = vertices

        # Angular sweep: every ray from the reference point must cross the
        # boundary exactly once, i.e. consecutive vertex angles advance
        # strictly counter-clockwise.
        rel = self.vertices - self.reference_point
        nxt = np.roll(rel, -1, axis=0)
        crosses = rel[:, 0] * nxt[:, 1] - rel[:, 1] * nxt[:, 0]
        if np.any(crosses <= 0):
            raise ValueError(
                "polygon is not star-shaped with respect to the reference point"
            )

        self._vertex_angles = np.arctan2(rel[:, 1], rel[:, 0])
        edges = nxt - rel
        edge_normals = np.stack([edges[:, 1], -edges[:, 0]], axis=1)
        self._edge_normals = edge_normals / np.linalg.norm(
            edge_normals, axis=1, keepdims=True
        )
        # Shrink blend zones where vertices are angularly close.
        gaps = np.abs(_wrap_angle(np.roll(self._vertex_angles, -1) - self._vertex_angles))
        half = np.minimum(
            _VERTEX_BLEND_HALF_ANGLE,
            0.49 * np.minimum(gaps, np.roll(gaps, 1)),
        )
        self._blend_half = half
        self._hit_cache = (None, None)

    def _hit_edge(self, direction):
        """Index and ray length of the single edge crossed along ``direction``.

        Consecutive queries along the same ray (gamma then normal at one
        position) reuse the previous result.
        """
        key = (float(direction[0]), float(direction[1]))
        if key == self._hit_cache[0]:
            return self._hit_cache[1]
        origin = self.reference_point
        best_t = np.inf
        best_index = -1
        for i in range(len(self.vertices)):
            v1 = self.vertices[i]
            v2 = self.vertices[(i + 1) % len(self.vertices)]
            edge = v2 - v1
            denom = direction[0] * (-edge[1]) - direction[1] * (-edge[0])
            if abs(denom) < 1e-15:
                continue
            diff = v1 - origin
            t = (diff[0] * (-edge[1]) - diff[1] * (-edge[0])) / denom
            u = (direction[0] * diff[1] - direction[1] * diff[0]) / denom
            if t > 0 and -1e-12 <= u <= 1.0 + 1e-12 and t < best_t:
                best_t = t
                best_index = i
        if best_index < 0:
            raise ValueError("ray does not cross the polygon boundary")
        self._hit_cache = (key, (best_index, best_t))
        return best_index, best_t

    def _base_radius(self, direction):
        _, t = self._hit_edge(direction)
        return float(t)

    def normal(self, position):
        """Outward normal of the crossed edge, blended near vertices."""
        offset = as_point(position, dim=2) - self.reference_point
        distance = np.linalg.norm(offset)
        if distance < _CENTER_TOL:
            raise ValueError("normal undefined at the reference point")
        direction = offset / distance
        index, _ = self._hit_edge(direction)
        angle = np.arctan2(direction[1], direction[0])
        m = len(self.vertices)

        # Blend across the start vertex of the hit edge ...
        delta = _wrap_angle(angle - self._vertex_angles[index])
        if abs(delta) < self._blend_half[index]:
            prev_normal = self._edge_normals[(index - 1) % m]
            frac = _smoothstep(
                (delta + self._blend_half[index]) / (2.0 * self._blend_half[index])
            )
            return geodesic_interpolate(prev_normal, self._edge_normals[index], frac)
        # ... or across its end vertex.
        end = (index + 1) % m
        delta = _wrap_angle(angle - self._vertex_angles[end])
        if abs(delta) < self._blend_half[end]:
            next_normal = self._edge_normals[end]
            frac = _smoothstep(
                (delta + self._blend_half[end]) / (2.0 * self._blend_half[end])
            )
            return geodesic_interpolate(self._edge_normals[index], next_normal, frac)
        return self._edge_normals[index].copy()


class BoundaryObstacle:
    """Inverted (hull) wrapper: free space is the inside of the obstacle.

    Gamma is the reciprocal of the wrapped obstacle's and the normal and
    reference direction flip sign.
    """

    is_boundary = True

    def __init__(self, inner):
        if isinstance(inner, BoundaryObstacle):
            raise TypeError("cannot invert an already inverted obstacle")
        self.inner = inner

    @property
    def dimension(self):
        return self.inner.dimension

    @property
    def center(self):
        return self.inner.center

    @property
    def reference_point(self):
        return self.inner.reference_point

    @property
    def margin(self):
        return self.inner.margin

    def boundary_radius(self, position):
        return self.inner.boundary_radius(position)

    def gamma(self, position):
        inner_gamma = self.inner.gamma(position)
        if inner_gamma == 0.0:
            return np.inf
        return 1.0 / inner_gamma

    def normal(self, position):
        return -self.inner.normal(position)

    def reference_direction(self, position):
        return -self.inner.reference_direction(position)

    def surface_point(self, direction):
        return self.inner.surface_point(direction)

    def outline(self, n=128):
        return self.inner.outline(n)


def invert(obstacle):
    """Wrap ``obstacle`` as an enclosing hull (see ``BoundaryObstacle``)."""
    return BoundaryObstacle(obstacle)


def obstacle_from_config(config):
    """Build an obstacle from its scenario-JSON description."""
    kind = config.get("type")
    common = dict(
        reference_point=config.get("reference_point"),
        distance_power=config.get("p", 1),
        margin=config.get("margin", 0.0),
    )
    if kind == "ellipse":
        obstacle = Ellipse(
            center=config["center"],
            semi_axes=config["semi_axes"],
            orientation=np.deg2rad(config.get("orientation_deg", 0.0)),
            **common,
        )
    elif kind == "star_polygon":
        obstacle = StarPolygon(
            vertices=config["vertices"],
            center=config.get("center"),
            **common,
        )
    else:
        raise ValueError(f"unknown obstacle type: {kind!r}")
    if config.get("is_boundary", False):
        return invert(obstacle)
    return obstacle


def _wrap_angle(angle):
    """Wrap to (-pi, pi]."""
    wrapped = np.mod(angle + np.pi, 2.0 * np.pi) - np.pi
    if np.isscalar(angle) or np.ndim(angle) == 0:
        return float(wrapped) if wrapped != -np.pi else np.pi
    wrapped = np.where(wrapped == -np.pi, np.pi, wrapped)
    return wrapped


def _smoothstep(t):
    """C1 ramp from 0 to 1 on [0, 1]."""
    t = min(max(float(t), 0.0), 1.0)
    return t * t * (3.0 - 2.0 * t)
