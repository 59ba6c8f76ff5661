"""Minimal deterministic SVG 1.1 line and bar plots.

The CSV the plot was drawn from is embedded verbatim in ``<metadata>``, so
the numbers inside an SVG are exactly those of the companion CSV.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

import numpy as np

from molanneal.export import atomic_write_text, csv_text

WIDTH, HEIGHT = 800, 600
MARGIN = dict(left=90, right=170, top=50, bottom=70)
PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f")


class EmptyTableError(ValueError):
    pass


@dataclass
class LineTable:
    x_label: str
    x: np.ndarray
    series: dict[str, np.ndarray]
    y_label: str = ""
    title: str = ""
    markers_x: list[float] = field(default_factory=list)  # vertical guide lines

    def csv(self) -> str:
        names = list(self.series)
        return csv_text([self.x_label, *names], zip(self.x, *(self.series[n] for n in names)))


@dataclass
class BarTable:
    labels: list[str]
    values: np.ndarray
    y_label: str = "probability"
    title: str = ""

    def csv(self) -> str:
        return csv_text(["label", self.y_label], zip(self.labels, self.values))


def nice_ticks(lo: float, hi: float, n: int = 6) -> list[float]:
    if not (math.isfinite(lo) and math.isfinite(hi)):
        return []
    if hi == lo:
        hi, lo = hi + 0.5 * (abs(hi) or 1.0), lo - 0.5 * (abs(lo) or 1.0)
    raw = (hi - lo) / max(n - 1, 1)
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    start = math.ceil(lo / step - 1e-9) * step
    ticks = []
    t = start
    while t <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(t) < 1e-12 * step else t)
        t = start + len(ticks) * step
    return ticks


def _num(v: float) -> str:
    return format(v, ".2f")


def _label(v: float) -> str:
    return format(v, ".4g")


class _Frame:
    def __init__(self, xlo, xhi, ylo, yhi):
        if xhi == xlo:
            xlo, xhi = xlo - 0.5, xhi + 0.5
        if yhi == ylo:
            ylo, yhi = ylo - 0.5, yhi + 0.5
        self.xlo, self.xhi, self.ylo, self.yhi = xlo, xhi, ylo, yhi
        self.left = MARGIN["left"]
        self.right = WIDTH - MARGIN["right"]
        self.top = MARGIN["top"]
        self.bottom = HEIGHT - MARGIN["bottom"]

    def px(self, x):
        return self.left + (x - self.xlo) / (self.xhi - self.xlo) * (self.right - self.left)

    def py(self, y):
        return self.bottom - (y - self.ylo) / (self.yhi - self.ylo) * (self.bottom - self.top)


def _header(title: str, data_csv: str) -> list[str]:
    return [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f"<metadata><![CDATA[\n{data_csv}]]></metadata>",
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.0f}" y="28" text-anchor="middle" font-family="sans-serif" font-size="16">{escape(title)}</text>',
    ]


def _axes(fr: _Frame, xticks, yticks, x_label, y_label, x_names=None) -> list[str]:
    out = [
        f'<rect x="{fr.left}" y="{fr.top}" width="{fr.right - fr.left}" height="{fr.bottom - fr.top}" '
        'fill="none" stroke="black" stroke-width="1"/>'
    ]
    for t in yticks:
        y = _num(fr.py(t))
        out.append(f'<line x1="{fr.left}" y1="{y}" x2="{fr.left - 5}" y2="{y}" stroke="black"/>')
        out.append(f'<text x="{fr.left - 8}" y="{y}" text-anchor="end" dominant-baseline="middle" '
                   f'font-family="sans-serif" font-size="12">{_label(t)}</text>')
    for i, t in enumerate(xticks):
        x = _num(fr.px(t))
        text = x_names[i] if x_names else _label(t)
        out.append(f'<line x1="{x}" y1="{fr.bottom}" x2="{x}" y2="{fr.bottom + 5}" stroke="black"/>')
        out.append(f'<text x="{x}" y="{fr.bottom + 20}" text-anchor="middle" font-family="sans-serif" '
                   f'font-size="12">{escape(text)}</text>')
    cx = (fr.left + fr.right) / 2
    cy = (fr.top + fr.bottom) / 2
    out.append(f'<text x="{cx:.0f}" y="{HEIGHT - 20}" text-anchor="middle" font-family="sans-serif" '
               f'font-size="14">{escape(x_label)}</text>')
    out.append(f'<text x="22" y="{cy:.0f}" text-anchor="middle" font-family="sans-serif" font-size="14" '
               f'transform="rotate(-90 22 {cy:.0f})">{escape(y_label)}</text>')
    return out


def render_lines(table: LineTable) -> str:
    x = np.asarray(table.x, float)
    if x.size == 0 or not table.series:
        raise EmptyTableError("line plot needs at least one point and one series")
    ys = {k: np.asarray(v, float) for k, v in table.series.items()}
    finite = np.concatenate([v[np.isfinite(v)] for v in ys.values()] + [np.zeros(0)])
    if finite.size == 0:
        raise EmptyTableError("no finite values to plot")
    yticks = nice_ticks(float(finite.min()), float(finite.max()))
    xticks = nice_ticks(float(x.min()), float(x.max()))
    fr = _Frame(min(x.min(), xticks[0]), max(x.max(), xticks[-1]),
                min(finite.min(), yticks[0]), max(finite.max(), yticks[-1]))
    out = _header(table.title, table.csv())
    out += _axes(fr, xticks, yticks, table.x_label, table.y_label)
    for xm in table.markers_x:
        if math.isfinite(xm):
            px = _num(fr.px(xm))
            out.append(f'<line x1="{px}" y1="{fr.top}" x2="{px}" y2="{fr.bottom}" stroke="gray" '
                       'stroke-dasharray="4 4"/>')
    for i, (name, y) in enumerate(ys.items()):
        color = PALETTE[i % len(PALETTE)]
        ok = np.isfinite(y)
        pts = " ".join(f"{_num(fr.px(a))},{_num(fr.py(b))}" for a, b in zip(x[ok], y[ok]))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        ly = fr.top + 18 * i + 10
        out.append(f'<line x1="{fr.right + 12}" y1="{ly}" x2="{fr.right + 32}" y2="{ly}" stroke="{color}" '
                   'stroke-width="2"/>')
        out.append(f'<text x="{fr.right + 38}" y="{ly}" dominant-baseline="middle" font-family="sans-serif" '
                   f'font-size="12">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_bars(table: BarTable) -> str:
    vals = np.asarray(table.values, float)
    if vals.size == 0:
        raise EmptyTableError("bar plot needs at least one bar")
    top = max(float(vals.max()), 0.0)
    yticks = nice_ticks(0.0, top if top > 0 else 1.0)
    fr = _Frame(-0.5, len(vals) - 0.5, 0.0, max(top, yticks[-1]))
    out = _header(table.title, table.csv())
    out += _axes(fr, list(range(len(vals))), yticks, "outcome", table.y_label, x_names=list(table.labels))
    slot = (fr.right - fr.left) / len(vals)
    out.append('<g class="bars" fill="#1f77b4">')
    for i, v in enumerate(vals):
        h = fr.bottom - fr.py(max(v, 0.0))
        out.append(f'<rect x="{_num(fr.px(i) - 0.35 * slot)}" y="{_num(fr.bottom - h)}" '
                   f'width="{_num(0.7 * slot)}" height="{_num(h)}"/>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_svg(table, path=None, kind: str | None = None) -> str:
    """Render ``table`` as ``lines`` or ``bars``; write to ``path`` when given."""
    kind = kind or ("bars" if isinstance(table, BarTable) else "lines")
    if kind == "lines":
        if not isinstance(table, LineTable):
            raise TypeError("lines plot needs a LineTable")
        text = render_lines(table)
    elif kind == "bars":
        if not isinstance(table, BarTable):
            raise TypeError("bars plot needs a BarTable")
        text = render_bars(table)
    else:
        raise ValueError(f"plot kind must be 'lines' or 'bars', got {kind!r}")
    if path is not None:
        atomic_write_text(path, text)
    return text
