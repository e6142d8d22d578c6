"""Deterministic SVG rendering of planar configurations.

Output bytes depend only on the input values: the configuration is first
brought to its canonical similarity frame, coordinates are emitted with fixed
six-decimal precision, and elements follow a fixed order (points by index,
then certificate arcs by assignment order).
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionUnsupported
from .geom import plane_gauge

_MARGIN = 0.05
_CANVAS = 640.0


def _fmt(value):
    out = f"{value:.6f}"
    return "0.000000" if out == "-0.000000" else out


def render_svg(config, certificate=None, project_first_two=False):
    """Render a configuration (and optional certificate arcs) as an SVG string.

    Only planar configurations are rendered; pass ``project_first_two`` to
    draw the first-two-coordinate projection of a higher-dimensional one.
    The configuration is normalized first, so similar configurations give
    byte-identical output.
    """
    raw = config.points
    if config.dim != 2:
        if not project_first_two:
            raise DimensionUnsupported(
                "rendering requires dim == 2; pass project_first_two=True to project"
            )
        raw = np.array(raw[:, :2])
    origin, rot, inv_scale, flip = plane_gauge(raw)
    pts = (raw - origin) @ rot.T * inv_scale
    pts[:, 1] *= flip

    def map_ray(ray):
        r = rot @ np.asarray(ray[:2], dtype=float)
        return r[0], -flip * r[1]  # SVG y axis points down

    xs, ys = pts[:, 0], -pts[:, 1]
    span_x = max(float(xs.max() - xs.min()), 1e-9)
    span_y = max(float(ys.max() - ys.min()), 1e-9)
    span = max(span_x, span_y)
    pad = _MARGIN * span
    scale = _CANVAS / (span + 2 * pad)

    def sx(x):
        return (x - float(xs.min()) + pad) * scale

    def sy(y):
        return (y - float(ys.min()) + pad) * scale

    width = (span_x + 2 * pad) * scale
    height = (span_y + 2 * pad) * scale
    point_r = 0.012 * _CANVAS
    arc_r = 0.05 * _CANVAS

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(width)}" height="{_fmt(height)}" '
        f'viewBox="0 0 {_fmt(width)} {_fmt(height)}">',
        f'<rect width="{_fmt(width)}" height="{_fmt(height)}" fill="white"/>',
    ]

    if certificate is not None:
        for a in certificate.assignments:
            apex = a.instance.apex
            cx, cy = sx(xs[apex]), sy(ys[apex])
            ax, ay = map_ray(a.instance.ray_a)
            bx, by = map_ray(a.instance.ray_b)
            x1, y1 = cx + arc_r * ax, cy + arc_r * ay
            x2, y2 = cx + arc_r * bx, cy + arc_r * by
            sweep = 1 if (ax * by - ay * bx) > 0 else 0
            lines.append(
                f'<path d="M {_fmt(x1)} {_fmt(y1)} A {_fmt(arc_r)} {_fmt(arc_r)} 0 0 {sweep} '
                f'{_fmt(x2)} {_fmt(y2)}" fill="none" stroke="#cc3333" stroke-width="1.5" '
                f'class="angle-arc"/>'
            )

    for i in range(len(pts)):
        cx, cy = sx(xs[i]), sy(ys[i])
        lines.append(
            f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="{_fmt(point_r)}" '
            f'fill="#225588" class="config-point"/>'
        )
        lines.append(
            f'<text x="{_fmt(cx + point_r * 1.4)}" y="{_fmt(cy - point_r * 1.4)}" '
            f'font-family="monospace" font-size="14">{i}</text>'
        )

    lines.append("</svg>")
    return "\n".join(lines) + "\n"
