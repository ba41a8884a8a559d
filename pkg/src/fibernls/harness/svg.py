"""Minimal line-chart SVG writer (no plotting dependency)."""

from __future__ import annotations

import math
from pathlib import Path

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
W, H = 640, 420
ML, MR, MT, MB = 70, 20, 40, 50


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _finite(xs, ys):
    return [(x, y) for x, y in zip(xs, ys) if math.isfinite(x) and math.isfinite(y)]


def line_chart(path, series: dict, title: str = "", xlabel: str = "", ylabel: str = "",
               logy: bool = False) -> None:
    """Write ``series`` = {label: (xs, ys)} as a line chart.

    With ``logy`` non-positive values are dropped.
    """
    cleaned = {}
    for label, (xs, ys) in series.items():
        pts = _finite([float(x) for x in xs], [float(y) for y in ys])
        if logy:
            pts = [(x, math.log10(y)) for x, y in pts if y > 0]
        cleaned[label] = pts
    allpts = [p for pts in cleaned.values() for p in pts]
    if allpts:
        x0, x1 = min(p[0] for p in allpts), max(p[0] for p in allpts)
        y0, y1 = min(p[1] for p in allpts), max(p[1] for p in allpts)
    else:
        x0, x1, y0, y1 = 0.0, 1.0, 0.0, 1.0
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pw, ph = W - ML - MR, H - MT - MB

    def sx(x):
        return ML + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return MT + ph - (y - y0) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
           f'viewBox="0 0 {W} {H}">',
           f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
           f'<rect x="{ML}" y="{MT}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
           f'<text x="{W / 2:.0f}" y="22" text-anchor="middle" font-size="15">{title}</text>',
           f'<text x="{W / 2:.0f}" y="{H - 10}" text-anchor="middle" font-size="13">{xlabel}</text>',
           f'<text x="16" y="{H / 2:.0f}" text-anchor="middle" font-size="13" '
           f'transform="rotate(-90 16 {H / 2:.0f})">{("log10 " if logy else "") + ylabel}</text>']
    for i in range(5):
        xv = x0 + (x1 - x0) * i / 4
        yv = y0 + (y1 - y0) * i / 4
        out.append(f'<text x="{_fmt(sx(xv))}" y="{MT + ph + 18}" text-anchor="middle" '
                   f'font-size="11">{xv:.3g}</text>')
        out.append(f'<text x="{ML - 6}" y="{_fmt(sy(yv) + 4)}" text-anchor="end" '
                   f'font-size="11">{yv:.3g}</text>')
    for i, (label, pts) in enumerate(cleaned.items()):
        color = _COLORS[i % len(_COLORS)]
        if pts:
            coords = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in pts)
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.6" points="{coords}"/>')
        ly = MT + 16 + 16 * i
        out.append(f'<line x1="{ML + 10}" y1="{ly - 4}" x2="{ML + 30}" y2="{ly - 4}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{ML + 36}" y="{ly}" font-size="12">{label}</text>')
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n")
