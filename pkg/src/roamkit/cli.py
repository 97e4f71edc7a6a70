"""Command-line interface.

Exit codes: 0 success, 2 unreadable/invalid input file, 3 training
failure, 4 property violation during evaluation.  The environment
variable ``ROAMKIT_SEED`` overrides any ``--seed`` option.
"""

import csv
import json
import os
import sys

import click
import numpy as np

from . import __version__
from .avoidance import ModulationAvoider, RotationalAvoider
from .demonstrations import Demonstration, load_demonstrations_csv, save_demonstrations_csv
from .exceptions import ModelFormatError, RoamkitError, TrainingError
from .learned_motion import TrainingConfig, train
from .metrics import evaluate_model
from .rollout import integrate, sample_grid
from .scenario import load_scenario
from .serialization import load_model, save_model
from .svg import render_field_svg, trace_streamlines

EXIT_BAD_INPUT = 2
EXIT_TRAINING_FAILURE = 3
EXIT_PROPERTY_VIOLATION = 4


def _effective_seed(seed):
    env = os.environ.get("ROAMKIT_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as error:
            raise click.ClickException(f"invalid ROAMKIT_SEED: {env!r}") from error
    return seed


def _fail(code, message):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load_starts(path):
    """Read start states from a CSV with an ``x,y`` header."""
    starts = []
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None or not {"x", "y"}.issubset(reader.fieldnames):
            raise ValueError("starts CSV requires columns x,y")
        for row in reader:
            starts.append([float(row["x"]), float(row["y"])])
    if not starts:
        raise ValueError("starts CSV contains no rows")
    return np.asarray(starts)


@click.group()
@click.version_option(version=__version__)
def main():
    """Motion generation toolkit: obstacle avoidance and motion learning."""


@main.command()
@click.argument("scenario_path", type=click.Path())
@click.option(
    "--engine",
    type=click.Choice(["modulation", "roam"]),
    default="roam",
    show_default=True,
)
@click.option("--out", "svg_path", type=click.Path(), default=None, help="SVG output path.")
@click.option("--csv", "csv_path", type=click.Path(), default=None, help="Field CSV output path.")
@click.option("--resolution", type=int, default=30, show_default=True)
@click.option("--streamlines", "n_streamlines", type=int, default=9, show_default=True)
def avoid(scenario_path, engine, svg_path, csv_path, resolution, n_streamlines):
    """Evaluate an avoidance scenario and export the vector field."""
    try:
        scenario = load_scenario(scenario_path)
    except RoamkitError as error:
        _fail(EXIT_BAD_INPUT, str(error))
    if engine == "modulation":
        avoider = ModulationAvoider(scenario.obstacles, scenario.dynamics)
    else:
        avoider = RotationalAvoider(
            scenario.obstacles, scenario.dynamics, scenario.roam_params
        )

    points, velocities, valid = sample_grid(
        avoider.evaluate, scenario.bbox, resolution
    )
    if csv_path:
        with open(csv_path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(["x", "y", "vx", "vy", "mask"])
            for point, velocity, ok in zip(points, velocities, valid):
                writer.writerow(
                    [
                        repr(float(point[0])),
                        repr(float(point[1])),
                        "" if not ok else repr(float(velocity[0])),
                        "" if not ok else repr(float(velocity[1])),
                        int(ok),
                    ]
                )
        click.echo(f"wrote field grid to {csv_path}")
    if svg_path:
        lines = trace_streamlines(
            avoider.evaluate,
            scenario.bbox,
            seeds_per_axis=n_streamlines,
            attractor=scenario.attractor,
        )
        render_field_svg(
            svg_path,
            scenario.bbox,
            obstacles=scenario.obstacles,
            streamlines=lines,
            attractor=scenario.attractor,
        )
        click.echo(f"wrote field plot to {svg_path}")
    click.echo(
        f"sampled {len(points)} grid points "
        f"({int(valid.sum())} valid, engine={engine})"
    )


@main.command(name="train")
@click.argument("demos_path", type=click.Path())
@click.option("--k", type=int, default=8, show_default=True, help="Number of clusters.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--out", "model_path", type=click.Path(), required=True)
def train_command(demos_path, k, seed, config_path, model_path):
    """Train a motion model from a demonstration CSV."""
    seed = _effective_seed(seed)
    try:
        demos = load_demonstrations_csv(demos_path)
    except (RoamkitError, OSError, ValueError) as error:
        _fail(EXIT_BAD_INPUT, str(error))
    config = None
    if config_path:
        try:
            with open(config_path, encoding="utf-8") as handle:
                config = TrainingConfig.from_dict(json.load(handle))
        except (OSError, json.JSONDecodeError, TypeError, ValueError) as error:
            _fail(EXIT_BAD_INPUT, f"cannot read config {config_path}: {error}")
    try:
        dynamics, report = train(demos, k=k, seed=seed, config=config)
    except TrainingError as error:
        _fail(EXIT_TRAINING_FAILURE, str(error))
    save_model(dynamics, model_path, seed=seed)
    click.echo(f"wrote model to {model_path}")
    for key, value in report.to_dict().items():
        click.echo(f"  {key}: {value}")


@main.command()
@click.argument("model_path", type=click.Path())
@click.option("--starts", "starts_path", type=click.Path(), default=None)
@click.option(
    "--grid",
    "grid_n",
    type=int,
    default=None,
    help="N x N start grid over the model region.",
)
@click.option("--dt", type=float, default=1e-2, show_default=True)
@click.option("--max-steps", type=int, default=20000, show_default=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
def rollout(model_path, starts_path, grid_n, dt, max_steps, out_path):
    """Integrate the learned field from a set of start states."""
    try:
        dynamics = load_model(model_path)
    except (ModelFormatError, OSError) as error:
        _fail(EXIT_BAD_INPUT, str(error))
    if (starts_path is None) == (grid_n is None):
        _fail(EXIT_BAD_INPUT, "provide exactly one of --starts or --grid")
    if starts_path is not None:
        try:
            starts = _load_starts(starts_path)
        except (OSError, ValueError) as error:
            _fail(EXIT_BAD_INPUT, f"cannot read starts {starts_path}: {error}")
    else:
        centers = dynamics.cluster_model.centers
        radius = dynamics.cluster_model.influence_radius
        low = centers.min(axis=0) - radius
        high = centers.max(axis=0) + radius
        xs = np.linspace(low[0], high[0], grid_n)
        ys = np.linspace(low[1], high[1], grid_n)
        starts = np.array([[x, y] for y in ys for x in xs])

    n_converged = 0
    with open(out_path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["rollout_id", "step", "t", "x", "y"])
        for rollout_id, start in enumerate(starts):
            result = integrate(
                dynamics.evaluate,
                start,
                dt=dt,
                max_steps=max_steps,
                attractor=dynamics.attractor,
            )
            n_converged += int(result.converged)
            for step, state in enumerate(result.states):
                writer.writerow(
                    [
                        rollout_id,
                        step,
                        repr(step * dt),
                        repr(float(state[0])),
                        repr(float(state[1])),
                    ]
                )
    click.echo(
        f"wrote {len(starts)} rollouts to {out_path} "
        f"({n_converged}/{len(starts)} converged)"
    )


@main.command(name="eval")
@click.argument("model_path", type=click.Path())
@click.argument("demos_path", type=click.Path())
@click.option("--out", "report_path", type=click.Path(), required=True)
@click.option("--dt", type=float, default=1e-2, show_default=True)
@click.option("--max-steps", type=int, default=20000, show_default=True)
def eval_command(model_path, demos_path, report_path, dt, max_steps):
    """Evaluate a model's reproduction quality against demonstrations."""
    try:
        dynamics = load_model(model_path)
        demos = load_demonstrations_csv(demos_path)
    except (ModelFormatError, RoamkitError, OSError, ValueError) as error:
        _fail(EXIT_BAD_INPUT, str(error))
    report = evaluate_model(dynamics, demos, dt=dt, max_steps=max_steps)
    with open(report_path, "w", encoding="utf-8") as handle:
        json.dump(report, handle, indent=2, sort_keys=True)
        handle.write("\n")
    click.echo(f"wrote report to {report_path}")
    click.echo(
        f"  convergence rate: {report['convergence_rate']:.3f}, "
        f"mean distance fraction: {report['mean_distance_fraction']:.4f}, "
        f"sequence violations: {report['sequence_violations']}"
    )
    if report["convergence_rate"] < 1.0 or report["sequence_violations"] > 0:
        _fail(
            EXIT_PROPERTY_VIOLATION,
            "evaluation found property violations (see report)",
        )


@main.command(name="import-lasa")
@click.argument("mat_path", type=click.Path())
@click.option("--out", "csv_path", type=click.Path(), required=True)
@click.option(
    "--subsample",
    type=int,
    default=1,
    show_default=True,
    help="Keep every n-th sample of each demonstration.",
)
def import_lasa(mat_path, csv_path, subsample):
    """One-shot conversion of a LASA handwriting .mat file to the
    canonical demonstration CSV."""
    try:
        from scipy.io import loadmat

        data = loadmat(mat_path)
        raw_demos = data["demos"].ravel()
    except (OSError, KeyError, ValueError) as error:
        _fail(EXIT_BAD_INPUT, f"cannot read LASA file {mat_path}: {error}")
    demos = []
    for demo_id, entry in enumerate(raw_demos):
        positions = np.asarray(entry["pos"][0, 0], dtype=float).T
        times = np.asarray(entry["t"][0, 0], dtype=float).ravel()
        if len(times) != len(positions):
            times = np.arange(len(positions), dtype=float) * float(
                entry["dt"][0, 0].ravel()[0]
            )
        keep = slice(None, None, max(int(subsample), 1))
        demos.append(Demonstration(demo_id, times[keep], positions[keep]))
    save_demonstrations_csv(demos, csv_path)
    click.echo(f"wrote {len(demos)} demonstrations to {csv_path}")


if __name__ == "__main__":
    main()
