"""Minimal deterministic SVG 1.1 rendering of log2 T against log2 N curves."""
from __future__ import annotations

import math
from typing import Mapping, Sequence
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 640, 480
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 150, 30, 60


def _fmt(v: float) -> str:
    return f"{v:.3f}".rstrip("0").rstrip(".")


def _colour(i: int, n: int) -> str:
    # blue (closed) to red (wide open)
    t = 0.0 if n <= 1 else i / (n - 1)
    r, g, b = int(30 + 200 * t), int(60 + 40 * (1 - abs(2 * t - 1))), int(220 - 190 * t)
    return f"#{r:02x}{g:02x}{b:02x}"


def _ticks(lo: float, hi: float) -> list[int]:
    return list(range(math.floor(lo), math.ceil(hi) + 1))


def render_scaling_figure(curves: Mapping[float, Sequence[tuple[int, float]]],
                          slopes: Mapping[float, float] | None = None,
                          title: str = "log2 T vs log2 N") -> str:
    """Polyline per omega (in ascending omega order) with a legend and slope notes."""
    slopes = slopes or {}
    omegas = sorted(curves)
    pts = {w: [(math.log2(n), math.log2(t)) for n, t in curves[w] if t > 0 and math.isfinite(t)] for w in omegas}
    xs = [x for p in pts.values() for x, _ in p] or [0.0, 1.0]
    ys = [y for p in pts.values() for _, y in p] or [0.0, 1.0]
    x0, x1 = math.floor(min(xs)), math.ceil(max(xs))
    y0, y1 = math.floor(min(ys)), math.ceil(max(ys))
    if x1 == x0:
        x1 = x0 + 1
    if y1 == y0:
        y1 = y0 + 1
    pw = WIDTH - MARGIN_L - MARGIN_R
    ph = HEIGHT - MARGIN_T - MARGIN_B

    def sx(x):
        return MARGIN_L + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return MARGIN_T + ph - (y - y0) / (y1 - y0) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<title>{escape(title)}</title>',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for t in _ticks(x0, x1):
        X = _fmt(sx(t))
        out.append(f'<line x1="{X}" y1="{MARGIN_T + ph}" x2="{X}" y2="{MARGIN_T + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{X}" y="{MARGIN_T + ph + 18}" font-size="11" text-anchor="middle">{t}</text>')
    ystep = max(1, (y1 - y0) // 10)
    for t in _ticks(y0, y1)[::ystep]:
        Y = _fmt(sy(t))
        out.append(f'<line x1="{MARGIN_L - 5}" y1="{Y}" x2="{MARGIN_L}" y2="{Y}" stroke="black"/>')
        out.append(f'<text x="{MARGIN_L - 8}" y="{Y}" font-size="11" text-anchor="end" '
                   f'dominant-baseline="middle">{t}</text>')
    out.append(f'<text x="{_fmt(MARGIN_L + pw / 2)}" y="{HEIGHT - 15}" font-size="13" '
               f'text-anchor="middle">log2 N</text>')
    out.append(f'<text x="18" y="{_fmt(MARGIN_T + ph / 2)}" font-size="13" text-anchor="middle" '
               f'transform="rotate(-90 18 {_fmt(MARGIN_T + ph / 2)})">log2 T</text>')

    for i, w in enumerate(omegas):
        colour = _colour(i, len(omegas))
        coords = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in pts[w])
        out.append(f'<polyline class="curve" data-omega="{w:g}" points="{coords}" fill="none" '
                   f'stroke="{colour}" stroke-width="1.5"/>')
        ly = MARGIN_T + 14 + 16 * i
        lx = WIDTH - MARGIN_R + 12
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 20}" y2="{ly}" stroke="{colour}" stroke-width="2"/>')
        label = f"omega={w:g}"
        if w in slopes:
            label += f" slope={slopes[w]:.3f}"
        out.append(f'<text class="legend" x="{lx + 25}" y="{ly}" font-size="10" '
                   f'dominant-baseline="middle">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
