"""Minimal hand-rolled SVG line plots.

Just enough for budget-vs-n figures: axes, ticks, polylines, point markers,
a legend, and an optional log-scale y axis.  No plotting stack, no text
measurement; output is deterministic for identical inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 72, 24, 44, 52


@dataclass(frozen=True)
class Series:
    label: str
    xs: Sequence[float]
    ys: Sequence[float]
    color: str = "#1f6fb2"
    markers: bool = True
    dashed: bool = False

    def __post_init__(self) -> None:
        if len(self.xs) != len(self.ys):
            raise ValueError("series x and y lengths differ")
        if len(self.xs) == 0:
            raise ValueError("series needs at least one point")


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _nice_ticks(lo: float, hi: float, target: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / max(1, target - 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-9 * step:
        ticks.append(round(t, 12))
        t += step
    return ticks


def _tick_label(v: float) -> str:
    if v == 0:
        return "0"
    if abs(v) >= 10000 or abs(v) < 0.01:
        exp = math.floor(math.log10(abs(v)))
        mant = v / 10.0**exp
        if abs(mant - round(mant)) < 1e-9 and round(mant) == 1:
            return f"1e{exp}"
        return f"{mant:.1f}e{exp}"
    if v == int(v):
        return str(int(v))
    return f"{v:g}"


def render_line_plot(
    series: Sequence[Series],
    title: str,
    xlabel: str,
    ylabel: str,
    log_y: bool = False,
    width: int = 640,
    height: int = 440,
) -> str:
    if not series:
        raise ValueError("nothing to plot")
    xs_all = [float(x) for s in series for x in s.xs]
    ys_all = [float(y) for s in series for y in s.ys]
    if log_y:
        if min(ys_all) <= 0.0:
            raise ValueError("log-scale plot requires positive y values")
        ys_all = [math.log10(y) for y in ys_all]

    x_lo, x_hi = min(xs_all), max(xs_all)
    y_lo, y_hi = min(ys_all), max(ys_all)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - (0.5 if log_y else 1.0), y_hi + (0.5 if log_y else 1.0)
    # breathing room above and below the data
    pad = 0.06 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    plot_w = width - _MARGIN_L - _MARGIN_R
    plot_h = height - _MARGIN_T - _MARGIN_B

    def px(x: float) -> float:
        return _MARGIN_L + (x - x_lo) / (x_hi - x_lo) * plot_w

    def py(y: float) -> float:
        return _MARGIN_T + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h

    out: list[str] = []
    out.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">'
    )
    out.append(f'<rect width="{width}" height="{height}" fill="white"/>')
    out.append(
        f'<text x="{width / 2:.0f}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="15">{title}</text>'
    )

    # axes
    x0, y0 = _MARGIN_L, _MARGIN_T + plot_h
    out.append(
        f'<path d="M {x0} {_MARGIN_T} L {x0} {y0} L {x0 + plot_w} {y0}" '
        f'stroke="black" fill="none" stroke-width="1"/>'
    )

    # x ticks: one per integer when the span is small, else nice steps
    if x_hi - x_lo <= 14 and all(float(x).is_integer() for x in xs_all):
        x_ticks = [float(t) for t in range(math.ceil(x_lo), math.floor(x_hi) + 1)]
    else:
        x_ticks = _nice_ticks(x_lo, x_hi)
    for t in x_ticks:
        x = px(t)
        out.append(f'<line x1="{_fmt(x)}" y1="{y0}" x2="{_fmt(x)}" y2="{y0 + 5}" stroke="black"/>')
        out.append(
            f'<text x="{_fmt(x)}" y="{y0 + 18}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{_tick_label(t)}</text>'
        )

    if log_y:
        y_ticks = [float(k) for k in range(math.ceil(y_lo), math.floor(y_hi) + 1)]
        labels = [f"1e{int(k)}" for k in y_ticks]
    else:
        y_ticks = _nice_ticks(y_lo, y_hi)
        labels = [_tick_label(t) for t in y_ticks]
    for t, lab in zip(y_ticks, labels):
        y = py(t)
        out.append(f'<line x1="{x0 - 5}" y1="{_fmt(y)}" x2="{x0}" y2="{_fmt(y)}" stroke="black"/>')
        out.append(
            f'<text x="{x0 - 8}" y="{_fmt(y + 4)}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{lab}</text>'
        )
        out.append(
            f'<line x1="{x0}" y1="{_fmt(y)}" x2="{x0 + plot_w}" y2="{_fmt(y)}" '
            f'stroke="#dddddd" stroke-width="0.5"/>'
        )

    out.append(
        f'<text x="{_MARGIN_L + plot_w / 2:.0f}" y="{height - 12}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">{xlabel}</text>'
    )
    out.append(
        f'<text x="18" y="{_MARGIN_T + plot_h / 2:.0f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 18 {_MARGIN_T + plot_h / 2:.0f})">{ylabel}</text>'
    )

    for s in series:
        ys = [math.log10(float(y)) if log_y else float(y) for y in s.ys]
        pts = " ".join(f"{_fmt(px(float(x)))},{_fmt(py(y))}" for x, y in zip(s.xs, ys))
        dash = ' stroke-dasharray="6 4"' if s.dashed else ""
        out.append(
            f'<polyline points="{pts}" fill="none" stroke="{s.color}" stroke-width="1.5"{dash}/>'
        )
        if s.markers:
            for x, y in zip(s.xs, ys):
                out.append(
                    f'<circle cx="{_fmt(px(float(x)))}" cy="{_fmt(py(y))}" r="3" '
                    f'fill="{s.color}"/>'
                )

    ly = _MARGIN_T + 14
    for s in series:
        lx = _MARGIN_L + 12
        dash = ' stroke-dasharray="6 4"' if s.dashed else ""
        out.append(
            f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 24}" y2="{ly - 4}" '
            f'stroke="{s.color}" stroke-width="1.5"{dash}/>'
        )
        out.append(
            f'<text x="{lx + 30}" y="{ly}" font-family="sans-serif" font-size="11">{s.label}</text>'
        )
        ly += 16

    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(path: str, svg_text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(svg_text)
