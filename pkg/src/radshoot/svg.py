"""Minimal SVG line and tag-map plots.

Output is plain text with fixed number formatting, so identical inputs give
byte-identical files.
"""

from __future__ import annotations

from html import escape
from typing import Sequence

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf",
           "#7f7f7f")
TAG_COLORS = {"P": "#2ca02c", "N": "#d62728", "Undetermined": "#7f7f7f", "error": "#000000"}

W, H = 640, 420
ML, MR, MT, MB = 70, 150, 40, 50


def _num(x: float) -> str:
    return f"{x:.6g}"


def _ticks(lo, hi, n=5):
    if hi <= lo:
        hi = lo + 1.0
    return np.linspace(lo, hi, n)


class _Frame:
    def __init__(self, xlim, ylim):
        self.x0, self.x1 = xlim
        self.y0, self.y1 = ylim
        if self.x1 <= self.x0:
            self.x1 = self.x0 + 1.0
        if self.y1 <= self.y0:
            self.y1 = self.y0 + 1.0

    def px(self, x):
        return ML + (x - self.x0) / (self.x1 - self.x0) * (W - ML - MR)

    def py(self, y):
        return H - MB - (y - self.y0) / (self.y1 - self.y0) * (H - MT - MB)


def _axes(fr: _Frame, title, xlabel, ylabel) -> list:
    out = [f'<rect x="{ML}" y="{MT}" width="{W - ML - MR}" height="{H - MT - MB}" '
           'fill="none" stroke="#000"/>']
    for t in _ticks(fr.x0, fr.x1):
        x = fr.px(t)
        out.append(f'<line x1="{_num(x)}" y1="{H - MB}" x2="{_num(x)}" y2="{H - MB + 5}" '
                   'stroke="#000"/>')
        out.append(f'<text x="{_num(x)}" y="{H - MB + 18}" font-size="11" '
                   f'text-anchor="middle">{_num(t)}</text>')
    for t in _ticks(fr.y0, fr.y1):
        y = fr.py(t)
        out.append(f'<line x1="{ML - 5}" y1="{_num(y)}" x2="{ML}" y2="{_num(y)}" stroke="#000"/>')
        out.append(f'<text x="{ML - 8}" y="{_num(y + 4)}" font-size="11" '
                   f'text-anchor="end">{_num(t)}</text>')
    out.append(f'<text x="{(W - MR + ML) / 2}" y="{MT - 15}" font-size="14" '
               f'text-anchor="middle">{escape(title)}</text>')
    out.append(f'<text x="{(W - MR + ML) / 2}" y="{H - 12}" font-size="12" '
               f'text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="16" y="{(H - MB + MT) / 2}" font-size="12" text-anchor="middle" '
               f'transform="rotate(-90 16 {(H - MB + MT) / 2})">{escape(ylabel)}</text>')
    return out


def _wrap(body) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
            f'viewBox="0 0 {W} {H}">')
    return "\n".join([head, '<rect width="100%" height="100%" fill="#fff"/>', *body,
                      "</svg>"]) + "\n"


def line_plot(series: Sequence[tuple], title: str = "", xlabel: str = "r",
              ylabel: str = "u", xlim=None, ylim=None) -> str:
    """Polylines for ``(label, xs, ys)`` triples."""
    xs_all = np.concatenate([np.asarray(s[1], float) for s in series]) if series else np.zeros(1)
    ys_all = np.concatenate([np.asarray(s[2], float) for s in series]) if series else np.zeros(1)
    fr = _Frame(xlim or (float(xs_all.min()), float(xs_all.max())),
                ylim or (float(min(ys_all.min(), 0.0)), float(ys_all.max())))
    body = _axes(fr, title, xlabel, ylabel)
    zero = fr.py(0.0)
    if fr.y0 < 0 < fr.y1:
        body.append(f'<line x1="{ML}" y1="{_num(zero)}" x2="{W - MR}" y2="{_num(zero)}" '
                    'stroke="#999" stroke-dasharray="4 3"/>')
    for j, (label, xs, ys) in enumerate(series):
        color = PALETTE[j % len(PALETTE)]
        pts = " ".join(f"{_num(fr.px(x))},{_num(fr.py(y))}"
                       for x, y in zip(np.asarray(xs, float), np.asarray(ys, float))
                       if fr.x0 <= x <= fr.x1)
        body.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        ly = MT + 16 * (j + 1)
        body.append(f'<line x1="{W - MR + 10}" y1="{ly - 4}" x2="{W - MR + 30}" y2="{ly - 4}" '
                    f'stroke="{color}" stroke-width="2"/>')
        body.append(f'<text x="{W - MR + 35}" y="{ly}" font-size="11">{escape(label)}</text>')
    return _wrap(body)


def tag_map(xs: Sequence[float], ys: Sequence[float], tags: Sequence[str], title: str = "",
            xlabel: str = "A", ylabel: str = "eps") -> str:
    """Colored cells, one per grid point, colored by tag."""
    ux = np.unique(np.asarray(xs, float))
    uy = np.unique(np.asarray(ys, float))

    def edges(u):
        if len(u) == 1:
            return np.array([u[0] - 0.5, u[0] + 0.5]) if u[0] == 0 else u[0] * np.array([0.5, 1.5])
        mid = 0.5 * (u[1:] + u[:-1])
        return np.concatenate(([u[0] - (mid[0] - u[0])], mid, [u[-1] + (u[-1] - mid[-1])]))

    ex, ey = edges(ux), edges(uy)
    fr = _Frame((ex[0], ex[-1]), (ey[0], ey[-1]))
    body = _axes(fr, title, xlabel, ylabel)
    for x, y, t in zip(xs, ys, tags):
        i = int(np.searchsorted(ux, x))
        j = int(np.searchsorted(uy, y))
        x0, x1 = fr.px(ex[i]), fr.px(ex[i + 1])
        y0, y1 = fr.py(ey[j + 1]), fr.py(ey[j])
        color = TAG_COLORS.get(t, TAG_COLORS["error"])
        body.append(f'<rect x="{_num(x0)}" y="{_num(y0)}" width="{_num(x1 - x0)}" '
                    f'height="{_num(y1 - y0)}" fill="{color}" stroke="#fff"/>')
    for j, (tag, color) in enumerate(TAG_COLORS.items()):
        ly = MT + 16 * (j + 1)
        body.append(f'<rect x="{W - MR + 10}" y="{ly - 10}" width="12" height="12" '
                    f'fill="{color}"/>')
        body.append(f'<text x="{W - MR + 28}" y="{ly}" font-size="11">{escape(tag)}</text>')
    return _wrap(body)
