"""Minimal standalone SVG line charts: log-scaled n on x, nats on y.

Output is byte-deterministic: fixed palette, fixed coordinate precision,
no timestamps or generated ids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence
from xml.sax.saxutils import escape

from bonkl.errors import EmptyData

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf")
DEFAULT_COLUMNS = ("formula", "exact_kl", "alt_expected", "proposed_expected")


@dataclass(frozen=True)
class SvgStyle:
    columns: tuple[str, ...] = DEFAULT_COLUMNS
    title: str = ""
    width: int = 720
    height: int = 450
    x_column: str = "n"


def _nice_step(span: float, target: int = 6) -> float:
    raw = span / target
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            return mult * mag
    return 10.0 * mag


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def emit_svg(rows: Sequence[Mapping[str, float]], style: SvgStyle = SvgStyle()) -> str:
    if not rows:
        raise EmptyData("cannot plot an empty table")
    left, right, top, bottom = 64, 180, 36, 48
    pw = style.width - left - right
    ph = style.height - top - bottom

    xs = [math.log10(float(r[style.x_column])) for r in rows]
    series = {c: [r.get(c) for r in rows] for c in style.columns}
    finite = [float(v) for vals in series.values() for v in vals if v is not None and math.isfinite(v)]
    if not finite:
        raise EmptyData("no finite values in the selected columns")

    x0, x1 = min(xs), max(xs)
    if x1 - x0 < 1e-12:
        x0, x1 = x0 - 0.5, x1 + 0.5
    y0, y1 = min(0.0, min(finite)), max(0.0, max(finite))
    if y1 - y0 < 1e-12:
        y1 = y0 + 1.0
    step = _nice_step(y1 - y0)
    y0 = math.floor(y0 / step) * step
    y1 = math.ceil(y1 / step) * step

    def px(x: float) -> float:
        return left + (x - x0) / (x1 - x0) * pw

    def py(y: float) -> float:
        return top + (y1 - y) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{style.width}" height="{style.height}" '
        f'viewBox="0 0 {style.width} {style.height}">',
        f'<rect x="0" y="0" width="{style.width}" height="{style.height}" fill="white"/>',
    ]
    if style.title:
        out.append(
            f'<text x="{_fmt(left + pw / 2)}" y="22" text-anchor="middle" font-family="sans-serif" '
            f'font-size="14">{escape(style.title)}</text>'
        )

    # axes and grid
    out.append('<g stroke="#cccccc" stroke-width="0.5">')
    for k in range(math.ceil(x0 - 1e-9), math.floor(x1 + 1e-9) + 1):
        out.append(f'<line x1="{_fmt(px(k))}" y1="{top}" x2="{_fmt(px(k))}" y2="{top + ph}"/>')
    n_yticks = int(round((y1 - y0) / step))
    for i in range(n_yticks + 1):
        y = y0 + i * step
        out.append(f'<line x1="{left}" y1="{_fmt(py(y))}" x2="{left + pw}" y2="{_fmt(py(y))}"/>')
    out.append("</g>")
    out.append(
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black" stroke-width="1"/>'
    )
    out.append('<g font-family="sans-serif" font-size="11">')
    for k in range(math.ceil(x0 - 1e-9), math.floor(x1 + 1e-9) + 1):
        out.append(f'<text x="{_fmt(px(k))}" y="{top + ph + 16}" text-anchor="middle">1e{k}</text>')
    for i in range(n_yticks + 1):
        y = y0 + i * step
        out.append(f'<text x="{left - 6}" y="{_fmt(py(y) + 4)}" text-anchor="end">{y:g}</text>')
    out.append(
        f'<text x="{_fmt(left + pw / 2)}" y="{style.height - 10}" text-anchor="middle">{escape(style.x_column)}</text>'
    )
    out.append(
        f'<text x="16" y="{_fmt(top + ph / 2)}" text-anchor="middle" '
        f'transform="rotate(-90 16 {_fmt(top + ph / 2)})">nats</text>'
    )
    out.append("</g>")

    for i, col in enumerate(style.columns):
        color = PALETTE[i % len(PALETTE)]
        pts = [(px(x), py(float(v))) for x, v in zip(xs, series[col]) if v is not None and math.isfinite(v)]
        if len(pts) >= 2:
            coords = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in pts)
            out.append(
                f'<polyline class="series" data-column="{escape(col)}" fill="none" stroke="{color}" '
                f'stroke-width="1.5" points="{coords}"/>'
            )
        else:
            for a, b in pts:
                out.append(
                    f'<circle class="marker" data-column="{escape(col)}" cx="{_fmt(a)}" cy="{_fmt(b)}" '
                    f'r="3" fill="{color}"/>'
                )
        ly = top + 14 + 18 * i
        lx = left + pw + 12
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 20}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(
            f'<text class="legend" x="{lx + 26}" y="{ly + 4}" font-family="sans-serif" '
            f'font-size="11">{escape(col)}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
