"""Minimal SVG line plots (log-scale y) without a plotting dependency."""

from __future__ import annotations

import math
from pathlib import Path

__all__ = ["plot_series_svg"]

_COLORS = ["#1f77b4", "#9467bd", "#ff7f0e", "#2ca02c", "#d62728", "#8c564b"]

_W, _H = 720, 480
_ML, _MR, _MT, _MB = 70, 20, 30, 50


def _ticks_log(lo: float, hi: float) -> list[float]:
    lo_e = math.floor(math.log10(lo))
    hi_e = math.ceil(math.log10(hi))
    step = max(1, (hi_e - lo_e) // 8)
    return [10.0 ** e for e in range(lo_e, hi_e + 1, step)]


def plot_series_svg(
    path,
    series: dict[str, tuple[list[float], list[float]]],
    title: str = "",
    xlabel: str = "iteration",
    ylabel: str = "value",
    log_y: bool = True,
) -> None:
    """Write one SVG with a polyline per named (x, y) series.

    Non-finite and (for log scale) non-positive points are dropped per
    series; an empty plot still produces a valid file.
    """
    cleaned: dict[str, tuple[list[float], list[float]]] = {}
    for name, (xs, ys) in series.items():
        pts = [(x, y) for x, y in zip(xs, ys)
               if math.isfinite(x) and math.isfinite(y) and (not log_y or y > 0.0)]
        if pts:
            cleaned[name] = ([p[0] for p in pts], [p[1] for p in pts])

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="12">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2}" y="18" text-anchor="middle" font-size="14">{title}</text>',
    ]
    if cleaned:
        all_x = [x for xs, _ in cleaned.values() for x in xs]
        all_y = [y for _, ys in cleaned.values() for y in ys]
        x_lo, x_hi = min(all_x), max(all_x)
        y_lo, y_hi = min(all_y), max(all_y)
        if x_hi == x_lo:
            x_hi = x_lo + 1.0
        if log_y:
            if y_hi == y_lo:
                y_hi = y_lo * 10.0
            ty = lambda y: math.log10(y)
        else:
            if y_hi == y_lo:
                y_hi = y_lo + 1.0
            ty = lambda y: y
        t_lo, t_hi = ty(y_lo), ty(y_hi)

        def px(x: float) -> float:
            return _ML + (x - x_lo) / (x_hi - x_lo) * (_W - _ML - _MR)

        def py(y: float) -> float:
            return _H - _MB - (ty(y) - t_lo) / (t_hi - t_lo) * (_H - _MT - _MB)

        # Axes.
        parts.append(f'<line x1="{_ML}" y1="{_H - _MB}" x2="{_W - _MR}" y2="{_H - _MB}" stroke="black"/>')
        parts.append(f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_H - _MB}" stroke="black"/>')
        for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
            x = x_lo + frac * (x_hi - x_lo)
            parts.append(f'<text x="{px(x):.1f}" y="{_H - _MB + 18}" text-anchor="middle">{x:.4g}</text>')
        y_ticks = _ticks_log(y_lo, y_hi) if log_y else [y_lo + f * (y_hi - y_lo) for f in (0, 0.25, 0.5, 0.75, 1)]
        for y in y_ticks:
            if ty(y) < t_lo - 1e-9 or ty(y) > t_hi + 1e-9:
                continue
            parts.append(f'<line x1="{_ML - 4}" y1="{py(y):.1f}" x2="{_ML}" y2="{py(y):.1f}" stroke="black"/>')
            parts.append(f'<text x="{_ML - 8}" y="{py(y) + 4:.1f}" text-anchor="end">{y:.3g}</text>')
        for i, (name, (xs, ys)) in enumerate(cleaned.items()):
            color = _COLORS[i % len(_COLORS)]
            points = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys))
            parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{points}"/>')
            ly = _MT + 16 * (i + 1)
            parts.append(f'<line x1="{_W - _MR - 130}" y1="{ly}" x2="{_W - _MR - 105}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
            parts.append(f'<text x="{_W - _MR - 100}" y="{ly + 4}">{name}</text>')
    parts.append(f'<text x="{_W / 2}" y="{_H - 12}" text-anchor="middle">{xlabel}</text>')
    parts.append(f'<text x="16" y="{_H / 2}" text-anchor="middle" transform="rotate(-90 16 {_H / 2})">{ylabel}</text>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts))
