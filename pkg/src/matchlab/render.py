"""SVG arc diagrams of matchings on the line."""
from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

from .points import PointConfig

WIDTH = 1000
HEIGHT = 400
MARGIN = 20
RED_COLOUR = "#c0392b"
BLUE_COLOUR = "#2e5fa8"
ONE_COLOUR = "#333333"


def _f(x: float) -> str:
    return format(float(x), ".6f").rstrip("0").rstrip(".")


def render_svg(config: PointConfig, m=None, title: str | None = None) -> str:
    """Points as vertical ticks on an axis; an edge whose red end is on the left is
    drawn as an upward arc, otherwise as a downward arc (one-colour edges go up)."""
    lo, hi = config.window[0]
    span = hi - lo
    ax = HEIGHT / 2
    sx = lambda x: MARGIN + (float(x) - lo) / span * (WIDTH - 2 * MARGIN)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        '<rect width="100%" height="100%" fill="white"/>',
    ]
    if title:
        parts.append(f'<text x="{MARGIN}" y="{MARGIN}" font-size="12">{escape(title)}</text>')
    parts.append(f'<line x1="{MARGIN}" y1="{_f(ax)}" x2="{WIDTH - MARGIN}" y2="{_f(ax)}" stroke="black" stroke-width="1"/>')
    if m is not None:
        other = config.blue if config.two_colour else config.red
        for i, j in m.edges:
            r, b = float(config.red[i]), float(other[j])
            x1, x2 = sx(min(r, b)), sx(max(r, b))
            rad = (x2 - x1) / 2
            up = (not config.two_colour) or r < b
            sweep = 1 if up else 0
            colour = ONE_COLOUR if not config.two_colour else ("#555555" if up else "#999999")
            parts.append(
                f'<path d="M {_f(x1)} {_f(ax)} A {_f(rad)} {_f(rad)} 0 0 {sweep} {_f(x2)} {_f(ax)}" '
                f'fill="none" stroke="{colour}" stroke-width="1"/>'
            )
    for arr, colour in ((config.red, RED_COLOUR if config.two_colour else ONE_COLOUR), (config.blue, BLUE_COLOUR)):
        for x in np.asarray(arr).reshape(-1).tolist():
            X = _f(sx(x))
            parts.append(f'<line x1="{X}" y1="{_f(ax - 6)}" x2="{X}" y2="{_f(ax + 6)}" stroke="{colour}" stroke-width="2"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
