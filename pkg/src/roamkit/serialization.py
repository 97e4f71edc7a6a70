"""Versioned JSON serialization of trained models.

The document is self-describing (``format`` and ``format_version``
fields) and forward-incompatible versions are rejected on load.  Writing
is deterministic: identical models produce identical bytes.
"""

import json

import numpy as np

from .avoidance import RoamParams
from .cluster_model import ClusterModel
from .demonstrations import Normalization
from .deviation import DeviationModel, RbfRegressor
from .exceptions import ModelFormatError
from .learned_motion import LearnedDynamics

FORMAT_NAME = "roamkit-model"
FORMAT_VERSION = 1


def model_to_dict(dynamics, seed=None):
    """JSON-ready dictionary for a ``LearnedDynamics``."""
    model = dynamics.cluster_model
    document = {
        "format": FORMAT_NAME,
        "format_version": FORMAT_VERSION,
        "seed": seed,
        "deviation_sign": "counter-clockwise positive",
        "clusters": {
            "feature_centers": model.feature_centers.tolist(),
            "centers": model.centers.tolist(),
            "influence_radius": model.influence_radius,
            "parent": model.parent.tolist(),
            "mean_sequence": model.mean_sequence.tolist(),
            "attractor": model.attractor.tolist(),
            "neighbors": [list(n) for n in model.neighbors],
            "gamma_cap": model.gamma_cap,
        },
        "normalization": None
        if model.normalization is None
        else {
            "mean": model.normalization.mean.tolist(),
            "scale": model.normalization.scale.tolist(),
        },
        "deviation_models": [
            {
                "cluster": dev.cluster,
                "base_target": np.asarray(dev.base_target).tolist(),
                "phi_max": dev.phi_max,
                "regressor": dev.regressor.to_config(),
            }
            for dev in dynamics.deviation_models
        ],
        "roam": {
            "smoothness_exponent": dynamics.roam_params.smoothness_exponent,
            "gamma_cap": dynamics.roam_params.gamma_cap,
            "antipodal_epsilon": dynamics.roam_params.antipodal_epsilon,
            "tangent_from_initial": dynamics.roam_params.tangent_from_initial,
            "linear_combination": dynamics.roam_params.linear_combination,
        },
        "speed": {
            "gain": dynamics.speed_gain,
            "cap": dynamics.speed_cap,
            "fallback_gain": dynamics.fallback_gain,
        },
    }
    return document


def model_from_dict(document):
    """Rebuild a ``LearnedDynamics`` from its JSON dictionary."""
    if document.get("format") != FORMAT_NAME:
        raise ModelFormatError("not a roamkit model document")
    version = document.get("format_version")
    if version != FORMAT_VERSION:
        raise ModelFormatError(
            f"unsupported model format version {version!r} "
            f"(this build reads version {FORMAT_VERSION})"
        )
    clusters = document["clusters"]
    normalization = document.get("normalization")
    model = ClusterModel(
        feature_centers=np.asarray(clusters["feature_centers"], dtype=float),
        centers=np.asarray(clusters["centers"], dtype=float),
        influence_radius=clusters["influence_radius"],
        parent=np.asarray(clusters["parent"], dtype=int),
        mean_sequence=np.asarray(clusters["mean_sequence"], dtype=float),
        attractor=np.asarray(clusters["attractor"], dtype=float),
        neighbors=clusters["neighbors"],
        normalization=None
        if normalization is None
        else Normalization(
            mean=np.asarray(normalization["mean"], dtype=float),
            scale=np.asarray(normalization["scale"], dtype=float),
        ),
        gamma_cap=clusters.get("gamma_cap", 1e6),
    )
    deviation_models = [
        DeviationModel(
            cluster=int(entry["cluster"]),
            base_target=np.asarray(entry["base_target"], dtype=float),
            regressor=RbfRegressor.from_config(entry["regressor"]),
            phi_max=float(entry["phi_max"]),
        )
        for entry in document["deviation_models"]
    ]
    roam = RoamParams(**document["roam"])
    speed = document["speed"]
    return LearnedDynamics(
        model,
        deviation_models,
        roam_params=roam,
        speed_gain=speed["gain"],
        speed_cap=speed["cap"],
        fallback_gain=speed["fallback_gain"],
    )


def save_model(dynamics, path, seed=None):
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(model_to_dict(dynamics, seed=seed), handle, indent=2, sort_keys=True)
        handle.write("\n")


def load_model(path):
    try:
        with open(path, encoding="utf-8") as handle:
            document = json.load(handle)
    except json.JSONDecodeError as error:
        raise ModelFormatError(f"{path}: invalid JSON ({error})") from error
    return model_from_dict(document)
