"""Hand-emitted SVG figures: AP-vs-threshold curves and candidate overlays.

No charting dependency; output is plain text, deterministic for fixed input,
and diffable.
"""

from __future__ import annotations

from typing import Sequence

from .model import ScoreTable, StarPolygon
from . import geometry

__all__ = ["ap_curve_svg", "candidate_overlay_svg"]

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
            "#17becf", "#7f7f7f")


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def ap_curve_svg(series: Sequence[tuple[str, ScoreTable]], title: str = "") -> str:
    """One polyline per (label, table): AP on y over IoU threshold on x."""
    if not series:
        raise ValueError("need at least one score table to plot")
    width, height = 640, 440
    left, right, top, bottom = 70, 620, 40, 390
    taus = sorted({row.tau for _, table in series for row in table.rows})
    t_lo, t_hi = taus[0], taus[-1]
    t_span = (t_hi - t_lo) or 1.0

    def sx(t: float) -> float:
        return left + (t - t_lo) / t_span * (right - left)

    def sy(ap: float) -> float:
        return bottom - ap * (bottom - top)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="13">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{(left + right) / 2:.1f}" y="24" text-anchor="middle" '
                   f'font-size="15">{title}</text>')
    # gridlines + y ticks
    for k in range(6):
        ap = k / 5
        y = sy(ap)
        out.append(f'<line x1="{left}" y1="{y:.1f}" x2="{right}" y2="{y:.1f}" '
                   f'stroke="#dddddd"/>')
        out.append(f'<text x="{left - 8}" y="{y + 4:.1f}" text-anchor="end">{_fmt(ap)}</text>')
    for t in taus:
        x = sx(t)
        out.append(f'<line x1="{x:.1f}" y1="{bottom}" x2="{x:.1f}" y2="{bottom + 5}" '
                   f'stroke="black"/>')
        out.append(f'<text x="{x:.1f}" y="{bottom + 20}" text-anchor="middle">{_fmt(t)}</text>')
    # axes
    out.append(f'<line x1="{left}" y1="{top}" x2="{left}" y2="{bottom}" stroke="black"/>')
    out.append(f'<line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}" stroke="black"/>')
    out.append(f'<text x="{(left + right) / 2:.1f}" y="{bottom + 40}" text-anchor="middle">'
               'IoU threshold</text>')
    out.append(f'<text x="20" y="{(top + bottom) / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 20 {(top + bottom) / 2:.1f})">average precision</text>')
    # curves + legend
    for s, (label, table) in enumerate(series):
        color = _PALETTE[s % len(_PALETTE)]
        pts = " ".join(f"{sx(row.tau):.2f},{sy(row.ap):.2f}" for row in table.rows)
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="2"/>')
        for row in table.rows:
            out.append(f'<circle cx="{sx(row.tau):.2f}" cy="{sy(row.ap):.2f}" r="3" '
                       f'fill="{color}"/>')
        ly = top + 8 + s * 18
        out.append(f'<line x1="{right - 150}" y1="{ly}" x2="{right - 125}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{right - 118}" y="{ly + 4}">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _center_color(center: tuple[int, int]) -> str:
    hue = (center[0] * 73 + center[1] * 151) % 360
    return f"hsl({hue},85%,45%)"


def _poly_points(poly: StarPolygon) -> str:
    ring = geometry.vertices(poly)
    # SVG x is the column, y the row
    return " ".join(f"{c:.2f},{r:.2f}" for r, c in ring)


def candidate_overlay_svg(
    height: int,
    width: int,
    candidates: Sequence[StarPolygon],
    survivors: Sequence[StarPolygon],
    scale: int = 3,
) -> str:
    """Sampled candidate polygons (thin) and NMS survivors (thick).

    Every polygon and its center dot share a color derived from the center
    pixel, so polygons can be traced back to where they were proposed.
    """
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width * scale}" '
        f'height="{height * scale}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="#111111"/>',
    ]
    for poly in candidates:
        color = _center_color(poly.center)
        out.append(f'<polygon points="{_poly_points(poly)}" fill="none" '
                   f'stroke="{color}" stroke-width="0.3" stroke-opacity="0.8"/>')
        out.append(f'<circle cx="{poly.center[1]}" cy="{poly.center[0]}" r="0.6" '
                   f'fill="{color}"/>')
    for poly in survivors:
        color = _center_color(poly.center)
        out.append(f'<polygon points="{_poly_points(poly)}" fill="none" '
                   f'stroke="{color}" stroke-width="1.0"/>')
        out.append(f'<circle cx="{poly.center[1]}" cy="{poly.center[0]}" r="0.9" '
                   f'fill="{color}" stroke="white" stroke-width="0.2"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
