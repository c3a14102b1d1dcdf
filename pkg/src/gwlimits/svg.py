"""Minimal dependency-free SVG polyline plots with a fixed viewBox."""

from __future__ import annotations

from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def polyline_plot(
    series: Sequence[tuple],
    labels: Sequence[str] = (),
    width: int = 640,
    height: int = 240,
    xlabel: str = "",
    ylabel: str = "",
    steps: Sequence[bool] = (),
) -> str:
    """Overlay (x, y) series as polylines; output is deterministic text."""
    margin = 40
    xs = [np.asarray(x, dtype=float) for x, _ in series]
    ys = [np.asarray(y, dtype=float) for _, y in series]
    finite_x = np.concatenate([x[np.isfinite(x)] for x in xs]) if xs else np.zeros(1)
    finite_y = np.concatenate([y[np.isfinite(y)] for y in ys]) if ys else np.zeros(1)
    x0, x1 = float(finite_x.min(initial=0.0)), float(finite_x.max(initial=1.0))
    y0, y1 = float(min(finite_y.min(initial=0.0), 0.0)), float(finite_y.max(initial=1.0))
    if x1 <= x0:
        x1 = x0 + 1.0
    if y1 <= y0:
        y1 = y0 + 1.0

    def px(x):
        return margin + (x - x0) / (x1 - x0) * (width - 2 * margin)

    def py(y):
        return height - margin - (y - y0) / (y1 - y0) * (height - 2 * margin)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {width} {height}" '
        f'width="{width}" height="{height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" stroke="black"/>',
        f'<text x="{width / 2:.1f}" y="{height - 8}" font-size="12" text-anchor="middle">{escape(xlabel)}</text>',
        f'<text x="12" y="{height / 2:.1f}" font-size="12" transform="rotate(-90 12 {height / 2:.1f})" '
        f'text-anchor="middle">{escape(ylabel)}</text>',
        f'<text x="{margin}" y="{height - margin + 14}" font-size="10">{x0:.3g}</text>',
        f'<text x="{width - margin}" y="{height - margin + 14}" font-size="10" text-anchor="end">{x1:.3g}</text>',
        f'<text x="{margin - 4}" y="{margin + 4}" font-size="10" text-anchor="end">{y1:.3g}</text>',
    ]
    for i, (x, y) in enumerate(zip(xs, ys)):
        ok = np.isfinite(x) & np.isfinite(y)
        x, y = x[ok], y[ok]
        if i < len(steps) and steps[i] and x.size:
            x = np.repeat(x, 2)[1:]
            y = np.repeat(y, 2)[:-1]
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, y))
        color = COLORS[i % len(COLORS)]
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        if i < len(labels):
            out.append(
                f'<text x="{width - margin - 4}" y="{margin + 14 * (i + 1)}" font-size="11" '
                f'text-anchor="end" fill="{color}">{escape(labels[i])}</text>'
            )
    out.append("</svg>")
    return "\n".join(out) + "\n"
