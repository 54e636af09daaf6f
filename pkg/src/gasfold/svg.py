"""
Minimal self-contained SVG line plots: polylines, axis ticks, labels, a legend.
"""
from __future__ import annotations

from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np

__all__ = ["Series", "line_plot", "nice_ticks"]

PALETTE = ("#1f4e9c", "#c0392b", "#2e8b57", "#8e44ad", "#d4820a", "#444444")


@dataclass
class Series:
    x: np.ndarray
    y: np.ndarray
    label: str
    color: str | None = None
    width: float = 1.5
    dash: str | None = None


def nice_ticks(lo, hi, target=6):
    """Round tick positions covering ``[lo, hi]``."""
    if not np.isfinite(lo) or not np.isfinite(hi):
        return np.array([0.0])
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / max(target, 1)
    mag = 10 ** np.floor(np.log10(raw))
    step = min((k * mag for k in (1, 2, 5, 10) if k * mag >= raw), default=10 * mag)
    start = np.ceil(lo / step) * step
    ticks = np.arange(start, hi + step * 1e-9, step)
    return np.round(ticks, 12)


def _fmt(v):
    v = float(v) + 0.0
    return f"{v:.2f}".rstrip("0").rstrip(".") if abs(v) < 1e4 else f"{v:.3g}"


def _split_finite(x, y):
    ok = np.isfinite(x) & np.isfinite(y)
    runs, cur = [], []
    for i in range(len(x)):
        if ok[i]:
            cur.append(i)
        elif cur:
            runs.append(cur)
            cur = []
    if cur:
        runs.append(cur)
    return runs


def line_plot(series, title, xlabel, ylabel, width=720, height=480, xlim=None, ylim=None):
    """Render ``series`` as an SVG document string."""
    left, right, top, bottom = 70, 170, 40, 60
    pw, ph = width - left - right, height - top - bottom
    xs = [np.asarray(s.x, dtype=float) for s in series]
    ys = [np.asarray(s.y, dtype=float) for s in series]
    allx = np.concatenate([x[np.isfinite(x)] for x in xs]) if xs else np.array([])
    ally = np.concatenate([y[np.isfinite(y)] for y in ys]) if ys else np.array([])
    x0, x1 = xlim or ((allx.min(), allx.max()) if allx.size else (0.0, 1.0))
    y0, y1 = ylim or ((ally.min(), ally.max()) if ally.size else (0.0, 1.0))
    if x1 <= x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 <= y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pad = 0.03 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad

    sx = lambda v: left + (v - x0) / (x1 - x0) * pw
    sy = lambda v: top + (y1 - v) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{left + pw / 2:.1f}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<clipPath id="plot"><rect x="{left}" y="{top}" width="{pw}" height="{ph}"/></clipPath>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for t in nice_ticks(x0, x1):
        X = sx(t)
        out.append(f'<line x1="{X:.2f}" y1="{top + ph}" x2="{X:.2f}" y2="{top + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{X:.2f}" y="{top + ph + 18}" text-anchor="middle">{_fmt(t)}</text>')
    for t in nice_ticks(y0, y1):
        Y = sy(t)
        out.append(f'<line x1="{left - 5}" y1="{Y:.2f}" x2="{left}" y2="{Y:.2f}" stroke="black"/>')
        out.append(f'<text x="{left - 8}" y="{Y + 4:.2f}" text-anchor="end">{_fmt(t)}</text>')
    out.append(f'<text x="{left + pw / 2:.1f}" y="{height - 15}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="18" y="{top + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 18 {top + ph / 2:.1f})">{escape(ylabel)}</text>')

    out.append('<g clip-path="url(#plot)">')
    for k, (s, x, y) in enumerate(zip(series, xs, ys)):
        color = s.color or PALETTE[k % len(PALETTE)]
        dash = f' stroke-dasharray="{s.dash}"' if s.dash else ""
        for run in _split_finite(x, y):
            pts = " ".join(f"{sx(x[i]):.2f},{sy(y[i]):.2f}" for i in run)
            out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="{s.width}"{dash}/>')
    out.append("</g>")

    lx, ly = left + pw + 15, top + 10
    for k, s in enumerate(series):
        color = s.color or PALETTE[k % len(PALETTE)]
        dash = f' stroke-dasharray="{s.dash}"' if s.dash else ""
        y = ly + 18 * k
        out.append(f'<line x1="{lx}" y1="{y}" x2="{lx + 24}" y2="{y}" stroke="{color}" stroke-width="2"{dash}/>')
        out.append(f'<text x="{lx + 30}" y="{y + 4}">{escape(s.label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
