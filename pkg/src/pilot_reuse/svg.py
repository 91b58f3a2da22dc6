"""Minimal self-contained SVG line plots for CCDF-style curves."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
           "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#637939"]
DASHES = ["", "6,3", "2,2", "8,3,2,3"]


@dataclass
class PlotStyle:
    width: int = 720
    height: int = 480
    x_label: str = "SINR threshold T (dB)"
    y_label: str = "coverage P[SINR > T]"
    title: str = ""
    y_range: tuple[float, float] | None = (0.0, 1.0)


@dataclass
class Series:
    x: np.ndarray
    y: np.ndarray
    label: str
    dashed: bool = False


def _ticks(lo: float, hi: float, n: int = 6) -> np.ndarray:
    if hi <= lo:
        return np.array([lo])
    raw = (hi - lo) / n
    mag = 10 ** np.floor(np.log10(raw))
    step = min((s * mag for s in (1, 2, 2.5, 5, 10) if s * mag >= raw), default=raw)
    return np.arange(np.ceil(lo / step) * step, hi + 1e-9 * step, step)


def render_svg(series: list[Series], style: PlotStyle | None = None) -> str:
    if not series:
        raise ValueError("need at least one curve")
    st = style or PlotStyle()
    left, right, top, bottom = 70, 230, 40, 55
    pw, ph = st.width - left - right, st.height - top - bottom
    xs = np.concatenate([np.asarray(s.x, float) for s in series])
    xs = xs[np.isfinite(xs)]
    x0, x1 = (float(xs.min()), float(xs.max())) if xs.size else (0.0, 1.0)
    if x1 == x0:
        x0, x1 = x0 - 1.0, x1 + 1.0
    if st.y_range is None:
        ys = np.concatenate([np.asarray(s.y, float) for s in series])
        ys = ys[np.isfinite(ys)]
        y0, y1 = (float(ys.min()), float(ys.max())) if ys.size else (0.0, 1.0)
        if y1 == y0:
            y0, y1 = y0 - 1.0, y1 + 1.0
    else:
        y0, y1 = st.y_range

    def px(x):
        return left + (np.asarray(x, float) - x0) / (x1 - x0) * pw

    def py(y):
        return top + (1.0 - (np.asarray(y, float) - y0) / (y1 - y0)) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{st.width}" height="{st.height}" '
           f'viewBox="0 0 {st.width} {st.height}" font-family="sans-serif" font-size="12">',
           f'<rect x="0" y="0" width="{st.width}" height="{st.height}" fill="white"/>',
           f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for t in _ticks(x0, x1):
        x = px(t)
        out.append(f'<line x1="{x:.2f}" y1="{top}" x2="{x:.2f}" y2="{top + ph}" stroke="#ddd"/>')
        out.append(f'<text x="{x:.2f}" y="{top + ph + 16}" text-anchor="middle">{t:g}</text>')
    for t in _ticks(y0, y1, 5):
        y = py(t)
        out.append(f'<line x1="{left}" y1="{y:.2f}" x2="{left + pw}" y2="{y:.2f}" stroke="#ddd"/>')
        out.append(f'<text x="{left - 6}" y="{y + 4:.2f}" text-anchor="end">{t:g}</text>')
    out.append(f'<text x="{left + pw / 2}" y="{st.height - 12}" text-anchor="middle">'
               f'{escape(st.x_label)}</text>')
    out.append(f'<text x="16" y="{top + ph / 2}" text-anchor="middle" '
               f'transform="rotate(-90 16 {top + ph / 2})">{escape(st.y_label)}</text>')
    if st.title:
        out.append(f'<text x="{left + pw / 2}" y="22" text-anchor="middle">{escape(st.title)}</text>')

    for i, s in enumerate(series):
        colour = PALETTE[i % len(PALETTE)]
        dash = "6,3" if s.dashed else DASHES[(i // len(PALETTE)) % len(DASHES)]
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        x, y = np.asarray(s.x, float), np.asarray(s.y, float)
        ok = np.isfinite(x) & np.isfinite(y)
        pts = np.column_stack([px(x[ok]), py(y[ok])])
        if len(pts) == 1:
            out.append(f'<circle cx="{pts[0, 0]:.2f}" cy="{pts[0, 1]:.2f}" r="3.5" fill="{colour}"/>')
        elif len(pts) > 1:
            coords = " ".join(f"{a:.2f},{b:.2f}" for a, b in pts)
            out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.6"{dash_attr} '
                       f'points="{coords}"/>')
        ly = top + 12 + 16 * i
        lx = left + pw + 12
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 24}" y2="{ly}" stroke="{colour}" '
                   f'stroke-width="1.6"{dash_attr}/>')
        out.append(f'<text x="{lx + 30}" y="{ly + 4}">{escape(s.label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_svg(curves, path, style: PlotStyle | None = None) -> None:
    """Write CCDF curves (x in dB) or raw ``Series`` to ``path``."""
    series = []
    for c in curves:
        if isinstance(c, Series):
            series.append(c)
        else:
            with np.errstate(divide="ignore"):
                x = 10.0 * np.log10(c.thresholds)
            series.append(Series(x, c.coverage, c.label or c.provenance,
                                 dashed=c.provenance == "analytic"))
    Path(path).write_text(render_svg(series, style), encoding="utf-8")
