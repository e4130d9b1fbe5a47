"""Minimal self-contained SVG charts (line, bar, raster).

Output is a pure function of the inputs: coordinates are printed with a
fixed number of decimals so reruns are byte-identical.
"""

from __future__ import annotations

import math
from html import escape
from typing import Sequence

WIDTH, HEIGHT = 720, 420
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 150, 40, 50

PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)


def _f(v: float) -> str:
    return f"{v:.2f}"


def _nice_ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=raw)
    start = math.ceil(lo / step) * step
    ticks = []
    v = start
    while v <= hi + step * 1e-9:
        ticks.append(round(v, 10))
        v += step
    return ticks


def _label(v: float) -> str:
    if v == int(v) and abs(v) < 1e7:
        return str(int(v))
    return f"{v:.3g}"


class _Canvas:
    def __init__(self, title: str, xlabel: str, ylabel: str,
                 xlim: tuple[float, float], ylim: tuple[float, float]):
        self.xlim, self.ylim = xlim, ylim
        self.pw = WIDTH - MARGIN_L - MARGIN_R
        self.ph = HEIGHT - MARGIN_T - MARGIN_B
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
            f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
            f'<text x="{WIDTH / 2}" y="22" text-anchor="middle" font-size="15">{escape(title)}</text>',
            f'<text x="{MARGIN_L + self.pw / 2}" y="{HEIGHT - 10}" text-anchor="middle">{escape(xlabel)}</text>',
            f'<text x="16" y="{MARGIN_T + self.ph / 2}" text-anchor="middle" '
            f'transform="rotate(-90 16 {MARGIN_T + self.ph / 2})">{escape(ylabel)}</text>',
        ]

    def x(self, v: float) -> float:
        lo, hi = self.xlim
        return MARGIN_L + (v - lo) / ((hi - lo) or 1.0) * self.pw

    def y(self, v: float) -> float:
        lo, hi = self.ylim
        return MARGIN_T + self.ph - (v - lo) / ((hi - lo) or 1.0) * self.ph

    def axes(self, xticks=None, yticks=None) -> None:
        x0, y0 = MARGIN_L, MARGIN_T + self.ph
        self.parts.append(
            f'<rect x="{x0}" y="{MARGIN_T}" width="{self.pw}" height="{self.ph}" '
            f'fill="none" stroke="black"/>'
        )
        for v in xticks if xticks is not None else _nice_ticks(*self.xlim):
            if self.xlim[0] <= v <= self.xlim[1]:
                px = _f(self.x(v))
                self.parts.append(f'<line x1="{px}" y1="{y0}" x2="{px}" y2="{y0 + 5}" stroke="black"/>')
                self.parts.append(f'<text x="{px}" y="{y0 + 18}" text-anchor="middle">{_label(v)}</text>')
        for v in yticks if yticks is not None else _nice_ticks(*self.ylim):
            if self.ylim[0] <= v <= self.ylim[1]:
                py = _f(self.y(v))
                self.parts.append(f'<line x1="{x0 - 5}" y1="{py}" x2="{x0}" y2="{py}" stroke="black"/>')
                self.parts.append(f'<text x="{x0 - 8}" y="{py}" text-anchor="end" '
                                  f'dominant-baseline="middle">{_label(v)}</text>')

    def legend(self, entries: Sequence[tuple[str, str]]) -> None:
        lx = MARGIN_L + self.pw + 12
        for i, (label, color) in enumerate(entries[:24]):
            ly = MARGIN_T + 8 + i * 15
            self.parts.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 18}" y2="{ly}" '
                              f'stroke="{color}" stroke-width="3"/>')
            self.parts.append(f'<text x="{lx + 24}" y="{ly}" dominant-baseline="middle">{escape(label)}</text>')

    def render(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def line_chart(x: Sequence[float], series: Sequence[tuple[str, Sequence[float]]], *,
               title: str, xlabel: str, ylabel: str,
               ylim: tuple[float, float] | None = None,
               highlight: str | None = None) -> str:
    """One polyline per ``(label, ys)`` in ``series`` sharing x values ``x``."""
    xs = [float(v) for v in x]
    if ylim is None:
        ys = [float(v) for _, s in series for v in s]
        lo, hi = min(ys, default=0.0), max(ys, default=1.0)
        ylim = (min(lo, 0.0), hi if hi > lo else lo + 1.0)
    c = _Canvas(title, xlabel, ylabel, (xs[0], xs[-1] if xs[-1] > xs[0] else xs[0] + 1), ylim)
    c.axes()
    entries = []
    for i, (label, ys) in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        width = 3 if label == highlight else 1.5
        pts = " ".join(f"{_f(c.x(a))},{_f(c.y(float(b)))}" for a, b in zip(xs, ys))
        c.parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="{width}"/>')
        entries.append((label, color))
    if len(series) > 1:
        c.legend(entries)
    return c.render()


def bar_chart(labels: Sequence[str], values: Sequence[float], *, title: str, xlabel: str,
              ylabel: str, errors: Sequence[float] | None = None) -> str:
    top = max([float(v) + (float(e) if errors else 0.0)
               for v, e in zip(values, errors or [0.0] * len(values))] + [1.0])
    n = len(values)
    c = _Canvas(title, xlabel, ylabel, (0.0, float(n)), (0.0, top * 1.05))
    c.axes(xticks=[])
    slot = c.pw / max(n, 1)
    for i, (lab, v) in enumerate(zip(labels, values)):
        x0 = MARGIN_L + i * slot + slot * 0.15
        y = c.y(float(v))
        c.parts.append(f'<rect x="{_f(x0)}" y="{_f(y)}" width="{_f(slot * 0.7)}" '
                       f'height="{_f(c.y(0.0) - y)}" fill="{PALETTE[0]}"/>')
        c.parts.append(f'<text x="{_f(x0 + slot * 0.35)}" y="{_f(c.y(0.0) + 18)}" '
                       f'text-anchor="middle">{escape(str(lab))}</text>')
        if errors:
            cx = _f(x0 + slot * 0.35)
            c.parts.append(f'<line x1="{cx}" y1="{_f(c.y(float(v) + float(errors[i])))}" x2="{cx}" '
                           f'y2="{_f(c.y(max(0.0, float(v) - float(errors[i]))))}" stroke="black"/>')
    return c.render()


def raster(points: Sequence[tuple[int, int]], *, num_rows: int, num_cols: int,
           title: str, xlabel: str, ylabel: str) -> str:
    """Mark cell (column=round, row=arm) for each point; rows are 1-based arms."""
    c = _Canvas(title, xlabel, ylabel, (0.5, num_cols + 0.5), (0.5, num_rows + 0.5))
    c.axes(yticks=list(range(1, num_rows + 1)) if num_rows <= 20 else None)
    w = max(c.pw / max(num_cols, 1), 0.5)
    h = max(c.ph / max(num_rows, 1) * 0.8, 1.0)
    for col, row in points:
        c.parts.append(f'<rect x="{_f(c.x(col) - w / 2)}" y="{_f(c.y(row) - h / 2)}" '
                       f'width="{_f(w)}" height="{_f(h)}" fill="{PALETTE[0]}"/>')
    return c.render()
