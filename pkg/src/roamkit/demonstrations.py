"""Demonstration ingestion and feature preprocessing.

Demonstrations are 2-D timed trajectories.  Preprocessing turns a set of
them into the clustering feature matrix: z-scored positions, unit motion
directions, and the per-demonstration sequence value.
"""

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import uniform_filter1d

from .exceptions import RoamkitError

_ZERO_SPEED = 1e-12

CSV_COLUMNS = ("demo_id", "t", "x", "y")
CSV_VELOCITY_COLUMNS = ("vx", "vy")


@dataclass
class Demonstration:
    """One recorded trajectory: strictly increasing times, >= 3 samples."""

    demo_id: int
    times: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray | None = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.positions = np.asarray(self.positions, dtype=float)
        if self.velocities is not None:
            self.velocities = np.asarray(self.velocities, dtype=float)
        n = len(self.times)
        if n < 3:
            raise ValueError(f"demo {self.demo_id}: needs >= 3 samples, got {n}")
        if self.positions.shape != (n, 2):
            raise ValueError(f"demo {self.demo_id}: positions must be ({n}, 2)")
        if not np.all(np.isfinite(self.positions)) or not np.all(
            np.isfinite(self.times)
        ):
            raise ValueError(f"demo {self.demo_id}: non-finite samples")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError(f"demo {self.demo_id}: times must strictly increase")
        if self.velocities is not None and self.velocities.shape != (n, 2):
            raise ValueError(f"demo {self.demo_id}: velocities must be ({n}, 2)")

    def __len__(self):
        return len(self.times)


def estimate_velocities(demo, smoothing_window=5):
    """Fill in velocities by finite differences and drop stationary samples.

    Central differences on the (possibly nonuniform) time grid, one-sided
    at the ends, then a moving-average smoothing.  Samples with zero
    speed are removed; an empty result is an error.
    """
    if len(demo) < 3:
        raise ValueError("velocity estimation needs >= 3 samples")
    velocities = np.column_stack(
        [np.gradient(demo.positions[:, i], demo.times) for i in range(2)]
    )
    if smoothing_window > 1:
        velocities = uniform_filter1d(
            velocities, size=int(smoothing_window), axis=0, mode="nearest"
        )
    return _filter_stationary(
        Demonstration(demo.demo_id, demo.times, demo.positions, velocities)
    )


def _filter_stationary(demo):
    speeds = np.linalg.norm(demo.velocities, axis=1)
    keep = speeds > _ZERO_SPEED
    if not np.any(keep):
        raise RoamkitError(f"demo {demo.demo_id}: empty after filtering")
    if keep.sum() < 3:
        raise RoamkitError(
            f"demo {demo.demo_id}: fewer than 3 moving samples after filtering"
        )
    return Demonstration(
        demo.demo_id,
        demo.times[keep],
        demo.positions[keep],
        demo.velocities[keep],
    )


def sequence_values(n_samples):
    """Sequence column i/N for i = 1..N."""
    return np.arange(1, n_samples + 1, dtype=float) / float(n_samples)


@dataclass
class Normalization:
    """Componentwise position scaling fitted on the training data."""

    mean: np.ndarray
    scale: np.ndarray

    def normalize(self, positions):
        return (np.asarray(positions, dtype=float) - self.mean) / self.scale

    def denormalize(self, positions):
        return np.asarray(positions, dtype=float) * self.scale + self.mean


def fit_normalization(positions, use_variance=False):
    """Zero-mean/unit-scale parameters for a stack of positions.

    ``use_variance`` divides by the variance instead of the standard
    deviation (literal alternative reading; off by default).
    """
    positions = np.asarray(positions, dtype=float)
    mean = positions.mean(axis=0)
    std = positions.std(axis=0)
    if np.any(std < 1e-12):
        raise RoamkitError("zero variance in a position component")
    scale = std**2 if use_variance else std
    return Normalization(mean=mean, scale=scale)


@dataclass
class FeatureConfig:
    """Feature assembly options.

    The three blocks are kept raw in the matrix (z-scored positions,
    unit directions, sequence in (0, 1]); the multipliers are applied
    only when clustering, where relative block scaling matters.
    """

    position_scale: float = 1.0
    direction_scale: float = 1.5
    sequence_scale: float = 2.0
    smoothing_window: int = 5
    normalize_by_variance: bool = False

    def multipliers(self):
        return np.array(
            [self.position_scale] * 2
            + [self.direction_scale] * 2
            + [self.sequence_scale]
        )


@dataclass
class FeatureMatrix:
    """Stacked per-sample features of all demonstrations.

    Columns: normalized position (2), unit direction (2), sequence (1).
    ``positions`` keeps the raw coordinates for later geometry.
    """

    features: np.ndarray
    positions: np.ndarray
    demo_ids: np.ndarray
    normalization: Normalization
    ends: np.ndarray = field(default=None)  # final raw position per demo

    @property
    def n_samples(self):
        return self.features.shape[0]

    @property
    def directions(self):
        return self.features[:, 2:4]

    @property
    def sequence(self):
        return self.features[:, 4]

    def scaled(self, config):
        """Feature matrix with block multipliers applied (for clustering)."""
        return self.features * config.multipliers()


def build_features(demos, config=None):
    """Run the preprocessing pipeline and assemble the feature matrix."""
    if not demos:
        raise RoamkitError("no demonstrations provided")
    config = config or FeatureConfig()
    prepared = []
    for demo in demos:
        if demo.velocities is None:
            prepared.append(estimate_velocities(demo, config.smoothing_window))
        else:
            prepared.append(_filter_stationary(demo))

    all_positions = np.vstack([d.positions for d in prepared])
    normalization = fit_normalization(
        all_positions, use_variance=config.normalize_by_variance
    )

    rows = []
    ids = []
    for demo in prepared:
        speeds = np.linalg.norm(demo.velocities, axis=1, keepdims=True)
        directions = demo.velocities / speeds
        rows.append(
            np.column_stack(
                [
                    normalization.normalize(demo.positions),
                    directions,
                    sequence_values(len(demo)),
                ]
            )
        )
        ids.append(np.full(len(demo), demo.demo_id, dtype=int))

    return FeatureMatrix(
        features=np.vstack(rows),
        positions=all_positions,
        demo_ids=np.concatenate(ids),
        normalization=normalization,
        ends=np.array([d.positions[-1] for d in prepared]),
    )


def load_demonstrations_csv(path):
    """Read demonstrations from the canonical CSV format.

    Header ``demo_id,t,x,y`` with optional ``vx,vy`` columns; rows are
    grouped by demonstration and time-ordered.
    """
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None or not set(CSV_COLUMNS).issubset(
            reader.fieldnames
        ):
            raise RoamkitError(
                f"{path}: expected columns {','.join(CSV_COLUMNS)}"
                f"[,{','.join(CSV_VELOCITY_COLUMNS)}]"
            )
        has_velocity = set(CSV_VELOCITY_COLUMNS).issubset(reader.fieldnames)
        groups = {}
        order = []
        for row in reader:
            demo_id = int(row["demo_id"])
            if demo_id not in groups:
                groups[demo_id] = []
                order.append(demo_id)
            sample = [float(row["t"]), float(row["x"]), float(row["y"])]
            if has_velocity:
                sample += [float(row["vx"]), float(row["vy"])]
            groups[demo_id].append(sample)

    demos = []
    for demo_id in order:
        data = np.asarray(groups[demo_id])
        velocities = data[:, 3:5] if has_velocity else None
        demos.append(
            Demonstration(demo_id, data[:, 0], data[:, 1:3], velocities)
        )
    if not demos:
        raise RoamkitError(f"{path}: no demonstration rows")
    return demos


def save_demonstrations_csv(demos, path):
    """Write demonstrations in the canonical CSV format."""
    has_velocity = all(d.velocities is not None for d in demos)
    columns = CSV_COLUMNS + (CSV_VELOCITY_COLUMNS if has_velocity else ())
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(columns)
        for demo in demos:
            for i in range(len(demo)):
                row = [
                    demo.demo_id,
                    repr(float(demo.times[i])),
                    repr(float(demo.positions[i, 0])),
                    repr(float(demo.positions[i, 1])),
                ]
                if has_velocity:
                    row += [
                        repr(float(demo.velocities[i, 0])),
                        repr(float(demo.velocities[i, 1])),
                    ]
                writer.writerow(row)
