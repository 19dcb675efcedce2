"""Minimal deterministic SVG charts (no plotting dependencies)."""

from __future__ import annotations

import math
from typing import Sequence

BLUE = "#1f5fbf"
RED = "#c8281e"
GREEN = "#2a9d3c"
BLACK = "#222222"


def _esc(text: str) -> str:
    return (
        str(text).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")
    )


def _num(v: float) -> str:
    return f"{v:.2f}"


def nice_ticks(lo: float, hi: float, count: int = 5) -> list:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step - 1e-9) * step
    ticks = []
    v = start
    while v <= hi + 1e-9 * step:
        ticks.append(round(v, 12))
        v += step
    return ticks


def _tick_label(v: float) -> str:
    if v == 0:
        return "0"
    if abs(v) >= 1e4 or abs(v) < 1e-3:
        return f"{v:.1e}"
    return f"{v:g}"


class Chart:
    """Single x/y panel. Data are mapped into a fixed plot box."""

    def __init__(self, title, x_label, y_label, x_range, y_range, width=900, height=560):
        self.title = title
        self.x_label = x_label
        self.y_label = y_label
        self.x0, self.x1 = x_range
        if self.x1 <= self.x0:
            self.x1 = self.x0 + 1.0
        self.y0, self.y1 = y_range
        if self.y1 <= self.y0:
            self.y1 = self.y0 + 1.0
        self.width = width
        self.height = height
        self.left, self.right, self.top, self.bottom = 80, width - 170, 50, height - 70
        self.body = []
        self.legend = []

    def px(self, x: float) -> float:
        return self.left + (x - self.x0) / (self.x1 - self.x0) * (self.right - self.left)

    def py(self, y: float) -> float:
        return self.bottom - (y - self.y0) / (self.y1 - self.y0) * (self.bottom - self.top)

    def polyline(self, xs: Sequence[float], ys: Sequence[float], color: str, width=0.6, opacity=0.5, cls="path", attrs=""):
        pts = " ".join(f"{_num(self.px(x))},{_num(self.py(y))}" for x, y in zip(xs, ys))
        self.body.append(
            f'<polyline class="{cls}" fill="none" stroke="{color}" stroke-width="{width}" '
            f'stroke-opacity="{opacity}"{attrs} points="{pts}"/>'
        )

    def step(self, xs: Sequence[float], ys: Sequence[float], color: str, label: str):
        sx, sy = [], []
        for i, (x, y) in enumerate(zip(xs, ys)):
            if i:
                sx.append(x)
                sy.append(sy[-1])
            sx.append(x)
            sy.append(y)
        self.polyline(sx, sy, color, width=1.6, opacity=1.0, cls="step", attrs=f' data-series="{_esc(label)}"')
        self.add_legend(label, color)

    def bar(self, x_left: float, x_right: float, height: float, color: str, series: str):
        y = self.py(height)
        self.body.append(
            f'<rect class="bar" data-series="{_esc(series)}" data-count="{height:g}" '
            f'x="{_num(self.px(x_left))}" y="{_num(y)}" width="{_num(self.px(x_right) - self.px(x_left))}" '
            f'height="{_num(self.py(self.y0) - y)}" fill="{color}"/>'
        )

    def add_legend(self, label: str, color: str):
        if all(lbl != label for lbl, _ in self.legend):
            self.legend.append((label, color))

    def _axes(self) -> list:
        out = [
            f'<rect x="{self.left}" y="{self.top}" width="{self.right - self.left}" '
            f'height="{self.bottom - self.top}" fill="none" stroke="{BLACK}" stroke-width="1"/>'
        ]
        for t in nice_ticks(self.x0, self.x1):
            x = _num(self.px(t))
            out.append(f'<line x1="{x}" y1="{self.bottom}" x2="{x}" y2="{self.bottom + 5}" stroke="{BLACK}"/>')
            out.append(
                f'<text x="{x}" y="{self.bottom + 20}" text-anchor="middle" font-size="12">{_tick_label(t)}</text>'
            )
        for t in nice_ticks(self.y0, self.y1):
            y = _num(self.py(t))
            out.append(f'<line x1="{self.left - 5}" y1="{y}" x2="{self.left}" y2="{y}" stroke="{BLACK}"/>')
            out.append(
                f'<text x="{self.left - 8}" y="{y}" text-anchor="end" dominant-baseline="middle" '
                f'font-size="12">{_tick_label(t)}</text>'
            )
        cx = (self.left + self.right) / 2
        cy = (self.top + self.bottom) / 2
        out.append(f'<text x="{cx}" y="{self.height - 20}" text-anchor="middle" font-size="14">{_esc(self.x_label)}</text>')
        out.append(
            f'<text x="20" y="{cy}" text-anchor="middle" font-size="14" '
            f'transform="rotate(-90 20 {cy})">{_esc(self.y_label)}</text>'
        )
        out.append(f'<text x="{cx}" y="30" text-anchor="middle" font-size="16">{_esc(self.title)}</text>')
        for i, (label, color) in enumerate(self.legend):
            y = self.top + 10 + 22 * i
            out.append(f'<rect x="{self.right + 15}" y="{y - 6}" width="14" height="12" fill="{color}"/>')
            out.append(f'<text x="{self.right + 35}" y="{y + 4}" font-size="12">{_esc(label)}</text>')
        return out

    def render(self) -> str:
        head = (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" height="{self.height}" '
            f'viewBox="0 0 {self.width} {self.height}">'
        )
        parts = [head, '<rect width="100%" height="100%" fill="#ffffff"/>', '<g class="data">']
        parts += self.body
        parts.append("</g>")
        parts += self._axes()
        parts.append("</svg>")
        return "\n".join(parts) + "\n"
