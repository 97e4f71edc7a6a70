"""Scenario JSON loading for the avoidance CLI."""

import json

import numpy as np

from .avoidance import RoamParams
from .dynamics import dynamics_from_config
from .exceptions import RoamkitError
from .obstacles import obstacle_from_config


class Scenario:
    """Parsed avoidance scenario: dynamics, obstacles, ROAM parameters."""

    def __init__(self, attractor, dynamics, obstacles, roam_params, bbox=None):
        self.attractor = np.asarray(attractor, dtype=float)
        self.dynamics = dynamics
        self.obstacles = obstacles
        self.roam_params = roam_params
        self.bbox = bbox if bbox is not None else self.default_bbox()

    def default_bbox(self, padding=1.5):
        """Window covering the attractor and all obstacle surfaces."""
        points = [self.attractor]
        for obstacle in self.obstacles:
            points.append(obstacle.outline(64))
        stacked = np.vstack([np.atleast_2d(p) for p in points])
        low = stacked.min(axis=0) - padding
        high = stacked.max(axis=0) + padding
        return (low[0], high[0], low[1], high[1])


def load_scenario(path):
    try:
        with open(path, encoding="utf-8") as handle:
            data = json.load(handle)
    except (OSError, json.JSONDecodeError) as error:
        raise RoamkitError(f"cannot read scenario {path}: {error}") from error
    return scenario_from_dict(data)


def scenario_from_dict(data):
    if "attractor" not in data:
        raise RoamkitError("scenario requires an 'attractor' field")
    dynamics_config = dict(data.get("dynamics", {"kind": "linear"}))
    dynamics_config.setdefault("attractor", data["attractor"])
    dynamics = dynamics_from_config(dynamics_config)
    obstacles = [obstacle_from_config(entry) for entry in data.get("obstacles", [])]
    roam_config = data.get("roam", {})
    roam_params = RoamParams(
        smoothness_exponent=roam_config.get("c_s", 3.0),
        gamma_cap=roam_config.get("gamma_cap", 1e6),
        antipodal_epsilon=roam_config.get("antipodal_epsilon", 1e-6),
        tangent_from_initial=roam_config.get("tangent_from_initial", False),
        linear_combination=roam_config.get("linear_combination", False),
    )
    bbox = tuple(data["bbox"]) if "bbox" in data else None
    return Scenario(data["attractor"], dynamics, obstacles, roam_params, bbox)
