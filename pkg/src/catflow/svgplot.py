"""Minimal SVG polyline plots (no plotting dependency).

Trajectories on the sphere are drawn in orthographic projection; real-line
trajectories as t-vs-x polylines.
"""
from __future__ import annotations

import numpy as np

_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b"]


def orthographic(points: np.ndarray, view_axis: int = 1) -> np.ndarray:
    """Drop the view axis of 3-d coordinates (orthographic projection)."""
    keep = [i for i in range(points.shape[1]) if i != view_axis]
    return points[:, keep[:2]]


def svg_polylines(path, curves, title: str = "", size: int = 480,
                  equal_axes: bool = True) -> None:
    """Write polyline curves to an SVG file.

    curves: sequence of (points (n,2) array, label) pairs.
    """
    pts = np.vstack([c[0] for c in curves if len(c[0])])
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    span = np.maximum(hi - lo, 1e-9)
    if equal_axes:
        span = np.array([span.max(), span.max()])
    margin = 40.0
    scale = (size - 2 * margin) / span

    def to_px(xy):
        x = margin + (xy[:, 0] - lo[0]) * scale[0]
        y = size - margin - (xy[:, 1] - lo[1]) * scale[1]
        return np.column_stack([x, y])

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
        f'<text x="{margin}" y="24" font-family="monospace" font-size="14">{title}</text>',
    ]
    for i, (xy, label) in enumerate(curves):
        if len(xy) == 0:
            continue
        px = to_px(np.asarray(xy, dtype=float))
        coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in px)
        color = _COLORS[i % len(_COLORS)]
        lines.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        lines.append(
            f'<text x="{margin}" y="{40 + 16 * i}" font-family="monospace" '
            f'font-size="12" fill="{color}">{label}</text>')
    lines.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def circle_points(radius: float = 1.0, n: int = 128) -> np.ndarray:
    th = np.linspace(0.0, 2 * np.pi, n)
    return np.column_stack([radius * np.cos(th), radius * np.sin(th)])
