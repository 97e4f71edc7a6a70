"""Initial dynamical systems that the avoidance engines deflect."""

import numpy as np

from .directional import rotate_in_plane_2d, unit
from .validation import as_point, check_positive


class LinearDynamics:
    """Linear attraction ``f(xi) = -gain * (xi - attractor)``."""

    def __init__(self, attractor, gain=1.0):
        self.attractor = as_point(attractor, name="attractor")
        self.gain = check_positive(gain, "gain")

    def evaluate(self, position):
        return -self.gain * (np.asarray(position, dtype=float) - self.attractor)


class SpiralDynamics:
    """Linear attraction rotated by a constant angle (2-D).

    Produces a spiral sink: trajectories wind around the attractor while
    converging.  Used as the nonlinear initial field in the engine
    comparison scenarios.
    """

    def __init__(self, attractor, gain=1.0, rotation=np.pi / 3):
        self.attractor = as_point(attractor, dim=2, name="attractor")
        self.gain = check_positive(gain, "gain")
        self.rotation = float(rotation)
        c, s = np.cos(self.rotation), np.sin(self.rotation)
        self._matrix = np.array([[c, -s], [s, c]])

    def evaluate(self, position):
        pull = -self.gain * (np.asarray(position, dtype=float) - self.attractor)
        return self._matrix @ pull


class CallableDynamics:
    """Arbitrary velocity field, optionally with a known attractor."""

    def __init__(self, func, attractor=None):
        self.func = func
        self.attractor = None if attractor is None else as_point(attractor)

    def evaluate(self, position):
        return np.asarray(self.func(np.asarray(position, dtype=float)), dtype=float)


def convergence_direction(dynamics, position, velocity=None):
    """Direction the avoided flow should revert to far from obstacles.

    For dynamics with a known attractor this is the unit vector toward
    it; otherwise the normalized initial velocity.  Returns ``None`` at
    the attractor itself, where no direction is defined.
    """
    attractor = getattr(dynamics, "attractor", None)
    if attractor is not None:
        offset = attractor - np.asarray(position, dtype=float)
        distance = np.linalg.norm(offset)
        if distance > 1e-12:
            return offset / distance
        return None
    if velocity is None:
        velocity = dynamics.evaluate(position)
    norm = np.linalg.norm(velocity)
    if norm < 1e-12:
        return None
    return np.asarray(velocity, dtype=float) / norm


def dynamics_from_config(config):
    """Build initial dynamics from their scenario-JSON description."""
    kind = config.get("kind", "linear")
    if kind == "linear":
        return LinearDynamics(config["attractor"], gain=config.get("k", 1.0))
    if kind == "spiral":
        return SpiralDynamics(
            config["attractor"],
            gain=config.get("k", 1.0),
            rotation=np.deg2rad(config.get("rotation_deg", 60.0)),
        )
    raise ValueError(f"unknown dynamics kind: {kind!r}")
