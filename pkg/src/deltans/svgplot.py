"""SVG rendering of a*b*-plane ellipses without a plotting dependency.

The canvas maps 1 CIELAB unit to 10 SVG user units, with the b* axis
pointing up (SVG y runs down, so b* is negated). The viewBox is fixed
so identical inputs yield byte-identical documents.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .ellipse import PlaneEllipse

UNITS_PER_LAB = 10.0
VIEWBOX = (-800.0, -800.0, 1600.0, 1600.0)

# Stroke colors keyed by nominal magnitude label.
MAGNITUDE_COLORS = {
    1.0: "#1f77b4",
    2.0: "#d62728",
    4.0: "#2ca02c",
    8.0: "#9467bd",
}
DEFAULT_COLOR = "#333333"


@dataclass(frozen=True)
class EllipsePlacement:
    """One ellipse positioned at its color center in the a*b* plane."""

    center_a: float
    center_b: float
    ellipse: PlaneEllipse
    label: str = ""
    magnitude_label: float | None = None


def _fmt(value: float) -> str:
    return f"{value:.3f}"


def _ellipse_path(item: EllipsePlacement) -> str:
    cx = item.center_a * UNITS_PER_LAB
    cy = -item.center_b * UNITS_PER_LAB
    rx = item.ellipse.semi_major * UNITS_PER_LAB
    ry = item.ellipse.semi_minor * UNITS_PER_LAB
    theta = item.ellipse.theta_degrees
    # Major-axis endpoints; the y flip makes the SVG-space rotation -theta.
    dx = rx * math.cos(math.radians(theta))
    dy = -rx * math.sin(math.radians(theta))
    x1, y1 = cx + dx, cy + dy
    x2, y2 = cx - dx, cy - dy
    rotation = -theta
    arc = f"A {_fmt(rx)} {_fmt(ry)} {_fmt(rotation)} 1 0"
    return (
        f"M {_fmt(x1)} {_fmt(y1)} "
        f"{arc} {_fmt(x2)} {_fmt(y2)} "
        f"{arc} {_fmt(x1)} {_fmt(y1)} Z"
    )


def color_for_magnitude(magnitude_label: float | None) -> str:
    if magnitude_label is None:
        return DEFAULT_COLOR
    return MAGNITUDE_COLORS.get(float(magnitude_label), DEFAULT_COLOR)


def render_ellipses(items: list[EllipsePlacement] | tuple[EllipsePlacement, ...]) -> str:
    """SVG document with one path per ellipse and labeled a*/b* axes."""
    x0, y0, width, height = VIEWBOX
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        (
            f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{_fmt(x0)} {_fmt(y0)} '
            f'{_fmt(width)} {_fmt(height)}" width="640" height="640">'
        ),
        f'  <line x1="{_fmt(x0)}" y1="0" x2="{_fmt(x0 + width)}" y2="0" stroke="#999999" stroke-width="2"/>',
        f'  <line x1="0" y1="{_fmt(y0)}" x2="0" y2="{_fmt(y0 + height)}" stroke="#999999" stroke-width="2"/>',
        f'  <text x="{_fmt(x0 + width - 60)}" y="-12" font-size="40" fill="#333333">a*</text>',
        f'  <text x="12" y="{_fmt(y0 + 48)}" font-size="40" fill="#333333">b*</text>',
    ]
    for item in items:
        color = color_for_magnitude(item.magnitude_label)
        lines.append(
            f'  <path d="{_ellipse_path(item)}" fill="none" stroke="{color}" stroke-width="3"/>'
        )
        if item.label:
            lx = item.center_a * UNITS_PER_LAB + 6.0
            ly = -item.center_b * UNITS_PER_LAB - 6.0
            lines.append(
                f'  <text x="{_fmt(lx)}" y="{_fmt(ly)}" font-size="28" fill="#555555">{item.label}</text>'
            )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
