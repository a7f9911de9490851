"""Minimal deterministic SVG line/scatter plots (no raster dependencies)."""

from __future__ import annotations

from dataclasses import dataclass, field
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


@dataclass
class _Series:
    xs: np.ndarray
    ys: np.ndarray
    label: str
    color: str
    kind: str  # "line" | "points"
    dashed: bool = False


@dataclass
class Plot:
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""
    width: int = 480
    height: int = 360
    equal_axes: bool = False
    series: list[_Series] = field(default_factory=list)

    margin_l = 70
    margin_r = 20
    margin_t = 30
    margin_b = 50

    def line(self, xs, ys, label="", color=None, dashed=False):
        self._add(xs, ys, label, color, "line", dashed)
        return self

    def points(self, xs, ys, label="", color=None):
        self._add(xs, ys, label, color, "points")
        return self

    def _add(self, xs, ys, label, color, kind, dashed=False):
        color = color or PALETTE[len(self.series) % len(PALETTE)]
        self.series.append(_Series(np.asarray(xs, float), np.asarray(ys, float), label, color, kind, dashed))

    def _limits(self):
        xs = np.concatenate([s.xs for s in self.series]) if self.series else np.array([0.0, 1.0])
        ys = np.concatenate([s.ys for s in self.series]) if self.series else np.array([0.0, 1.0])
        x0, x1, y0, y1 = xs.min(), xs.max(), ys.min(), ys.max()
        if x1 == x0:
            x0, x1 = x0 - 1.0, x1 + 1.0
        if y1 == y0:
            y0, y1 = y0 - 1.0, y1 + 1.0
        if self.equal_axes:
            span = max(x1 - x0, y1 - y0)
            cx, cy = (x0 + x1) / 2, (y0 + y1) / 2
            x0, x1, y0, y1 = cx - span / 2, cx + span / 2, cy - span / 2, cy + span / 2
        pad_x, pad_y = 0.05 * (x1 - x0), 0.05 * (y1 - y0)
        return x0 - pad_x, x1 + pad_x, y0 - pad_y, y1 + pad_y

    def render(self) -> str:
        x0, x1, y0, y1 = self._limits()
        pw = self.width - self.margin_l - self.margin_r
        ph = self.height - self.margin_t - self.margin_b

        def px(x):
            return self.margin_l + (x - x0) / (x1 - x0) * pw

        def py(y):
            return self.margin_t + (y1 - y) / (y1 - y0) * ph

        out = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" height="{self.height}" '
            f'viewBox="0 0 {self.width} {self.height}" font-family="sans-serif" font-size="11">',
            f'<rect x="0" y="0" width="{self.width}" height="{self.height}" fill="white"/>',
            f'<rect x="{self.margin_l}" y="{self.margin_t}" width="{pw}" height="{ph}" '
            f'fill="none" stroke="black"/>',
        ]
        for t in np.linspace(x0, x1, 5):
            out.append(f'<text x="{px(t):.2f}" y="{self.margin_t + ph + 15}" text-anchor="middle">{t:.3g}</text>')
        for t in np.linspace(y0, y1, 5):
            out.append(f'<text x="{self.margin_l - 5}" y="{py(t) + 4:.2f}" text-anchor="end">{t:.3g}</text>')
        if self.title:
            out.append(f'<text x="{self.width / 2:.2f}" y="18" text-anchor="middle" font-size="13">'
                       f'{escape(self.title)}</text>')
        if self.xlabel:
            out.append(f'<text x="{self.margin_l + pw / 2:.2f}" y="{self.height - 10}" '
                       f'text-anchor="middle">{escape(self.xlabel)}</text>')
        if self.ylabel:
            out.append(f'<text x="14" y="{self.margin_t + ph / 2:.2f}" text-anchor="middle" '
                       f'transform="rotate(-90 14 {self.margin_t + ph / 2:.2f})">{escape(self.ylabel)}</text>')
        for s in self.series:
            if s.kind == "line":
                pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(s.xs, s.ys))
                dash = ' stroke-dasharray="5,3"' if s.dashed else ""
                out.append(f'<polyline points="{pts}" fill="none" stroke="{s.color}" stroke-width="1.5"{dash}/>')
            else:
                for x, y in zip(s.xs, s.ys):
                    out.append(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="3" fill="{s.color}"/>')
        labelled = [s for s in self.series if s.label]
        for k, s in enumerate(labelled):
            ly = self.margin_t + 12 + 14 * k
            lx = self.margin_l + 8
            out.append(f'<rect x="{lx}" y="{ly - 7}" width="10" height="4" fill="{s.color}"/>')
            out.append(f'<text x="{lx + 14}" y="{ly}">{escape(s.label)}</text>')
        out.append("</svg>")
        return "\n".join(out) + "\n"
