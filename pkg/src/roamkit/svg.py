"""Minimal deterministic SVG rendering of vector fields.

Hand-built markup (no plotting dependency): obstacle outlines,
streamline polylines traced with the rollout integrator, and an
attractor marker.  Identical inputs produce identical bytes.
"""

import numpy as np

from .exceptions import RoamkitError
from .rollout import integrate

_STYLE = (
    "polyline.streamline{fill:none;stroke:#2c6fbb;stroke-width:1.2}"
    "polygon.obstacle{fill:#d9d9d9;stroke:#444444;stroke-width:1.5}"
    "circle.attractor{fill:#c0392b}"
)


def trace_streamlines(field, bbox, seeds_per_axis=9, dt=0.02, max_steps=2000, attractor=None):
    """Short rollouts from a regular seed grid; failed seeds are skipped."""
    xmin, xmax, ymin, ymax = bbox
    xs = np.linspace(xmin, xmax, seeds_per_axis + 2)[1:-1]
    ys = np.linspace(ymin, ymax, seeds_per_axis + 2)[1:-1]
    lines = []
    for y in ys:
        for x in xs:
            try:
                result = integrate(
                    field,
                    np.array([x, y]),
                    dt=dt,
                    max_steps=max_steps,
                    attractor=attractor,
                    convergence_radius=1e-2,
                )
            except RoamkitError:
                continue
            if result.failed and len(result.states) < 2:
                continue
            lines.append(result.states)
    return lines


def render_field_svg(
    path,
    bbox,
    obstacles=(),
    streamlines=(),
    attractor=None,
    width=640,
    height=640,
):
    """Write an SVG of obstacle outlines, streamlines, and the attractor."""
    xmin, xmax, ymin, ymax = bbox
    span_x = xmax - xmin
    span_y = ymax - ymin
    if span_x <= 0 or span_y <= 0:
        raise ValueError("bbox must have positive extent")

    def to_pixels(points):
        points = np.asarray(points, dtype=float)
        px = (points[:, 0] - xmin) / span_x * width
        py = height - (points[:, 1] - ymin) / span_y * height
        return np.column_stack([px, py])

    def fmt(points):
        return " ".join(f"{x:.2f},{y:.2f}" for x, y in to_pixels(points))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f"<style>{_STYLE}</style>",
        f'<rect width="{width}" height="{height}" fill="#ffffff"/>',
    ]
    for line in streamlines:
        if len(line) < 2:
            continue
        parts.append(f'<polyline class="streamline" points="{fmt(line)}"/>')
    for obstacle in obstacles:
        parts.append(f'<polygon class="obstacle" points="{fmt(obstacle.outline())}"/>')
    if attractor is not None:
        pixel = to_pixels(np.asarray(attractor, dtype=float)[None, :])[0]
        parts.append(
            f'<circle class="attractor" cx="{pixel[0]:.2f}" cy="{pixel[1]:.2f}" r="5"/>'
        )
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("\n".join(parts))
        handle.write("\n")
