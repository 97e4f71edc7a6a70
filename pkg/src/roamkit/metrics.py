"""Rollout-versus-demonstration evaluation metrics."""

import numpy as np

from .rollout import integrate


def resample_arclength(points, n):
    """Resample a polyline to ``n`` points equally spaced in arc length."""
    points = np.asarray(points, dtype=float)
    if len(points) < 2:
        return np.repeat(points, n, axis=0)
    deltas = np.linalg.norm(np.diff(points, axis=0), axis=1)
    arclength = np.concatenate([[0.0], np.cumsum(deltas)])
    total = arclength[-1]
    if total < 1e-12:
        return np.repeat(points[:1], n, axis=0)
    targets = np.linspace(0.0, total, n)
    resampled = np.column_stack(
        [np.interp(targets, arclength, points[:, i]) for i in range(points.shape[1])]
    )
    return resampled


def mean_pointwise_distance(path_a, path_b, n=200):
    """Mean distance between two paths after arc-length resampling."""
    a = resample_arclength(path_a, n)
    b = resample_arclength(path_b, n)
    return float(np.mean(np.linalg.norm(a - b, axis=1)))


def bounding_box_diagonal(points):
    points = np.asarray(points, dtype=float)
    extent = points.max(axis=0) - points.min(axis=0)
    return float(np.linalg.norm(extent))


def sequence_progress_violations(dynamics, states):
    """Count cluster switches that decrease the mean sequence value.

    ``states`` is a rollout trajectory; transitions into or out of the
    fallback region (no active cluster) are ignored.
    """
    model = dynamics.cluster_model
    violations = 0
    previous = None
    for state in states:
        cluster = model.predict_cluster(state)
        if cluster is not None and previous is not None and cluster != previous:
            if model.mean_sequence[cluster] < model.mean_sequence[previous]:
                violations += 1
        if cluster is not None:
            previous = cluster
    return violations


def evaluate_model(dynamics, demos, dt=1e-2, max_steps=20000, convergence_radius=1e-2):
    """Reproduction metrics of a learned model against its demonstrations.

    Rolls the learned field out from each demonstration's start and
    reports per-demo mean distances (after arc-length resampling), the
    attractor convergence rate, and sequence-progress violations.
    """
    distances = []
    fractions = []
    converged = []
    violations = 0
    diagonal = bounding_box_diagonal(np.vstack([d.positions for d in demos]))
    for demo in demos:
        result = integrate(
            dynamics.evaluate,
            demo.positions[0],
            dt=dt,
            max_steps=max_steps,
            attractor=dynamics.attractor,
            convergence_radius=convergence_radius,
        )
        distance = mean_pointwise_distance(result.states, demo.positions)
        distances.append(distance)
        fractions.append(distance / diagonal)
        converged.append(bool(result.converged))
        violations += sequence_progress_violations(dynamics, result.states)
    return {
        "n_demonstrations": len(demos),
        "bounding_box_diagonal": diagonal,
        "mean_distance": float(np.mean(distances)),
        "mean_distance_fraction": float(np.mean(fractions)),
        "per_demo_distance": [float(d) for d in distances],
        "per_demo_distance_fraction": [float(f) for f in fractions],
        "convergence_rate": float(np.mean(converged)),
        "sequence_violations": int(violations),
    }
