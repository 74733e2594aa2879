"""Minimal SVG polyline emitter: time on [0, 1] horizontally, values centred vertically."""

from __future__ import annotations

from typing import Sequence

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")
MAX_POINTS = 4000


def _thin(ts: np.ndarray, ys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if len(ts) <= MAX_POINTS:
        return ts, ys
    keep = np.unique(np.linspace(0, len(ts) - 1, MAX_POINTS).round().astype(int))
    return ts[keep], ys[keep]


def polylines_svg(
    curves: Sequence[tuple[np.ndarray, np.ndarray, str]],
    width: int = 800,
    height: int = 400,
    title: str = "",
    dashed: Sequence[bool] | None = None,
) -> str:
    """Each curve is ``(ts, ys, colour)``. The vertical range is symmetric about 0."""
    margin = 30
    ymax = max((float(np.max(np.abs(ys))) for _, ys, _ in curves if len(ys)), default=1.0) or 1.0
    sx = (width - 2 * margin)
    sy = (height - 2 * margin) / (2 * ymax)
    mid = height / 2

    def px(t, y):
        return margin + t * sx, mid - y * sy

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{margin}" y1="{mid}" x2="{width - margin}" y2="{mid}" stroke="#999" stroke-width="0.5"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" stroke="#999" stroke-width="0.5"/>',
        f'<text x="{margin}" y="{height - 8}" font-size="11">0</text>',
        f'<text x="{width - margin - 6}" y="{height - 8}" font-size="11">1</text>',
        f'<text x="2" y="{margin + 4}" font-size="11">{ymax:.3g}</text>',
    ]
    if title:
        out.append(f'<text x="{width / 2}" y="16" font-size="13" text-anchor="middle">{title}</text>')
    for k, (ts, ys, colour) in enumerate(curves):
        ts, ys = _thin(np.asarray(ts, float), np.asarray(ys, float))
        pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in (px(t, v) for t, v in zip(ts, ys)))
        dash = ' stroke-dasharray="4,3"' if dashed and dashed[k] else ""
        out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1"{dash} points="{pts}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def family_curves(family, dashed: bool = False):
    return [
        (ts, ys, PALETTE[k % len(PALETTE)]) for k, (ts, ys) in enumerate(family.breakpoints)
    ], [dashed] * family.d
