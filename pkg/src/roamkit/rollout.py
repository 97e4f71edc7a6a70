"""Fixed-step integration of velocity fields and grid sampling."""

from dataclasses import dataclass

import numpy as np

from .exceptions import RoamkitError
from .validation import as_point


@dataclass
class RolloutResult:
    """Trajectory produced by ``integrate``.

    ``states`` always contains the start, so ``steps = len(states) - 1``.
    ``min_gamma_seen`` is the smallest obstacle gamma observed at any
    accepted state (inf when no gamma function was supplied).
    """

    states: np.ndarray
    converged: bool
    steps: int
    min_gamma_seen: float
    final_distance_to_attractor: float
    failed: bool = False
    failure_message: str = ""


def integrate(
    field,
    start,
    dt,
    max_steps,
    attractor=None,
    convergence_radius=1e-2,
    gamma_fn=None,
    stall_speed=0.0,
):
    """Roll out ``field`` from ``start`` with classical 4th-order Runge-Kutta.

    Parameters
    ----------
    field : callable
        Maps position to velocity.
    start : array-like
        Initial state.
    dt : float
        Step size in seconds, > 0.
    max_steps : int
        Step budget.
    attractor : array-like, optional
        Convergence target; rollouts stop once within
        ``convergence_radius`` of it.
    gamma_fn : callable, optional
        Maps position to the minimum obstacle gamma, tracked per state.
    stall_speed : float
        Stop early (not converged) when the field speed drops below this
        away from the attractor; 0 disables the check.

    A field evaluation error aborts the rollout and is reported on the
    result instead of propagating.
    """
    if dt <= 0:
        raise ValueError("dt must be > 0")
    state = as_point(start)
    attractor = None if attractor is None else as_point(attractor, dim=state.shape[0])
    states = [state.copy()]
    min_gamma = np.inf
    converged = False

    def distance_to_attractor(xi):
        return np.inf if attractor is None else float(np.linalg.norm(xi - attractor))

    if gamma_fn is not None:
        min_gamma = min(min_gamma, float(gamma_fn(state)))
    if distance_to_attractor(state) <= convergence_radius:
        return RolloutResult(
            states=np.asarray(states),
            converged=True,
            steps=0,
            min_gamma_seen=min_gamma,
            final_distance_to_attractor=distance_to_attractor(state),
        )

    for _ in range(int(max_steps)):
        try:
            k1 = field(state)
            if stall_speed > 0.0 and float(np.linalg.norm(k1)) < stall_speed:
                break
            k2 = field(state + 0.5 * dt * k1)
            k3 = field(state + 0.5 * dt * k2)
            k4 = field(state + dt * k3)
        except RoamkitError as error:
            return RolloutResult(
                states=np.asarray(states),
                converged=False,
                steps=len(states) - 1,
                min_gamma_seen=min_gamma,
                final_distance_to_attractor=distance_to_attractor(state),
                failed=True,
                failure_message=str(error),
            )
        state = state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        states.append(state.copy())
        if gamma_fn is not None:
            min_gamma = min(min_gamma, float(gamma_fn(state)))
        if distance_to_attractor(state) <= convergence_radius:
            converged = True
            break

    return RolloutResult(
        states=np.asarray(states),
        converged=converged,
        steps=len(states) - 1,
        min_gamma_seen=min_gamma,
        final_distance_to_attractor=distance_to_attractor(state),
    )


def sample_grid(field, bbox, resolution):
    """Evaluate ``field`` on a row-major grid over ``bbox``.

    Parameters
    ----------
    bbox : (xmin, xmax, ymin, ymax)
        Sampling window.
    resolution : int
        Points per axis, >= 2.

    Returns
    -------
    points : (n, 2) ndarray
    velocities : (n, 2) ndarray with NaN rows where evaluation failed
    valid : (n,) boolean mask
    """
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    xmin, xmax, ymin, ymax = bbox
    xs = np.linspace(xmin, xmax, resolution)
    ys = np.linspace(ymin, ymax, resolution)
    points = []
    velocities = []
    valid = []
    for y in ys:
        for x in xs:
            point = np.array([x, y])
            points.append(point)
            try:
                velocity = np.asarray(field(point), dtype=float)
                velocities.append(velocity)
                valid.append(True)
            except RoamkitError:
                velocities.append(np.full(2, np.nan))
                valid.append(False)
    return np.asarray(points), np.asarray(velocities), np.asarray(valid)
