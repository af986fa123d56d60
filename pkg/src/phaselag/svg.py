"""Minimal deterministic SVG line/marker plots (no timestamps, fixed viewBox)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 640, 400
LEFT, RIGHT, TOP, BOTTOM = 72, 150, 34, 52
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


@dataclass(frozen=True)
class Series:
    name: str
    x: Sequence[float]
    y: Sequence[float]
    kind: str = "line"  # or "points"


@dataclass(frozen=True)
class Axes:
    xlabel: str = ""
    ylabel: str = ""
    title: str = ""
    xlog: bool = False
    ylog: bool = False


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _range(vals: np.ndarray, log: bool):
    lo, hi = float(vals.min()), float(vals.max())
    if log:
        lo, hi = math.floor(lo), math.ceil(hi)
        if lo == hi:
            lo, hi = lo - 1, hi + 1
        return float(lo), float(hi)
    if lo == hi:
        pad = abs(lo) if lo else 1.0
        return lo - pad, hi + pad
    return lo, hi


def _ticks(lo: float, hi: float, log: bool):
    if log:
        step = max(1, math.ceil((hi - lo) / 8))
        return [(k, f"1e{int(k)}") for k in np.arange(lo, hi + 0.5, step)]
    raw = (hi - lo) / 5
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=10 * mag)
    first = math.ceil(lo / step) * step
    out = []
    v = first
    while v <= hi + 1e-9 * step:
        out.append((v, f"{round(v, 12):g}"))
        v += step
    return out


def emit_svg(series: Sequence[Series], axes: Axes = Axes()) -> str:
    """Render ``series`` into an SVG document string.

    Raises ``ValueError`` on an empty series list, a series with fewer than
    two points, non-finite data, or non-positive data on a log axis.
    """
    if not series:
        raise ValueError("no series to plot")
    data = []
    for s in series:
        x = np.asarray(s.x, dtype=float)
        y = np.asarray(s.y, dtype=float)
        if x.shape != y.shape or x.ndim != 1:
            raise ValueError(f"series {s.name!r}: x and y must be 1-d of equal length")
        if x.size < 2:
            raise ValueError(f"series {s.name!r} needs at least 2 points")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError(f"series {s.name!r} has non-finite values")
        if (axes.xlog and np.any(x <= 0)) or (axes.ylog and np.any(y <= 0)):
            raise ValueError(f"series {s.name!r} has non-positive values on a log axis")
        data.append((s, np.log10(x) if axes.xlog else x, np.log10(y) if axes.ylog else y))

    x0, x1 = _range(np.concatenate([d[1] for d in data]), axes.xlog)
    y0, y1 = _range(np.concatenate([d[2] for d in data]), axes.ylog)
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def px(v):
        return LEFT + (v - x0) / (x1 - x0) * pw

    def py(v):
        return TOP + ph - (v - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for v, label in _ticks(x0, x1, axes.xlog):
        X = _fmt(px(v))
        out.append(f'<line x1="{X}" y1="{TOP + ph}" x2="{X}" y2="{TOP + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{X}" y="{TOP + ph + 18}" text-anchor="middle">{escape(label)}</text>')
    for v, label in _ticks(y0, y1, axes.ylog):
        Y = _fmt(py(v))
        out.append(f'<line x1="{LEFT - 5}" y1="{Y}" x2="{LEFT}" y2="{Y}" stroke="black"/>')
        out.append(f'<text x="{LEFT - 8}" y="{Y}" text-anchor="end" dominant-baseline="middle">'
                   f'{escape(label)}</text>')
    if axes.title:
        out.append(f'<text x="{LEFT + pw / 2:.2f}" y="20" text-anchor="middle" font-size="13">'
                   f'{escape(axes.title)}</text>')
    if axes.xlabel:
        out.append(f'<text x="{LEFT + pw / 2:.2f}" y="{HEIGHT - 12}" text-anchor="middle">'
                   f'{escape(axes.xlabel)}</text>')
    if axes.ylabel:
        cy = TOP + ph / 2
        out.append(f'<text x="16" y="{cy:.2f}" text-anchor="middle" '
                   f'transform="rotate(-90 16 {cy:.2f})">{escape(axes.ylabel)}</text>')

    for k, (s, x, y) in enumerate(data):
        color = PALETTE[k % len(PALETTE)]
        if s.kind == "points":
            out.append(f'<g fill="{color}">')
            out.extend(f'<circle cx="{_fmt(px(a))}" cy="{_fmt(py(b))}" r="2"/>' for a, b in zip(x, y))
            out.append("</g>")
        elif s.kind == "line":
            pts = " ".join(f"{_fmt(px(a))},{_fmt(py(b))}" for a, b in zip(x, y))
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        else:
            raise ValueError(f"unknown series kind {s.kind!r}")
        ly = TOP + 12 + 16 * k
        lx = LEFT + pw + 10
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 18}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 24}" y="{ly}" dominant-baseline="middle">{escape(s.name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
