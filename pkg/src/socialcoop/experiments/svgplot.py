"""Dependency-free static SVG line charts for sweep results."""

from __future__ import annotations

import json
import math

WIDTH, HEIGHT = 640, 420
MARGIN = 70
PALETTE = ["#1f6fb2", "#d1495b", "#3a8c5c", "#8e6fb2", "#c98a2b", "#4f4f4f"]


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    step = (hi - lo) / n
    magnitude = 10 ** math.floor(math.log10(step))
    step = math.ceil(step / magnitude) * magnitude
    start = math.floor(lo / step) * step
    values = []
    v = start
    while v <= hi + step / 2:
        if v >= lo - step / 2:
            values.append(round(v, 12))
        v += step
    return values


def render_line_chart(
    series: dict[str, list[tuple[float, float]]],
    path,
    title: str = "",
    x_label: str = "",
    y_label: str = "",
    log_x: bool = False,
) -> None:
    """Write a line chart; ``series`` maps labels to (x, y) point lists."""
    points = [p for pts in series.values() for p in pts]
    if not points:
        raise ValueError("no points to plot")
    tx = (lambda x: math.log10(x)) if log_x else (lambda x: x)
    xs = [tx(p[0]) for p in points]
    ys = [p[1] for p in points]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys + [0.0]), max(ys)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    span_x = WIDTH - 2 * MARGIN
    span_y = HEIGHT - 2 * MARGIN
    px = lambda x: MARGIN + (tx(x) - x_lo) / (x_hi - x_lo) * span_x
    py = lambda y: HEIGHT - MARGIN - (y - y_lo) / (y_hi - y_lo) * span_y

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="24" text-anchor="middle" font-size="15">{title}</text>',
        f'<text x="{WIDTH / 2}" y="{HEIGHT - 14}" text-anchor="middle">{x_label}</text>',
        f'<text x="18" y="{HEIGHT / 2}" text-anchor="middle" '
        f'transform="rotate(-90 18 {HEIGHT / 2})">{y_label}</text>',
        f'<rect x="{MARGIN}" y="{MARGIN}" width="{span_x}" height="{span_y}" '
        f'fill="none" stroke="#999"/>',
    ]
    for v in _ticks(y_lo, y_hi):
        y = py(v)
        parts.append(f'<line x1="{MARGIN}" y1="{y:.1f}" x2="{WIDTH - MARGIN}" y2="{y:.1f}" '
                     f'stroke="#ddd"/>')
        parts.append(f'<text x="{MARGIN - 6}" y="{y + 4:.1f}" text-anchor="end">{v:g}</text>')
    x_values = sorted({p[0] for p in points})
    for v in x_values if len(x_values) <= 8 else _ticks(x_lo, x_hi):
        raw = v if len(x_values) <= 8 else (10 ** v if log_x else v)
        x = px(raw)
        parts.append(f'<text x="{x:.1f}" y="{HEIGHT - MARGIN + 16}" '
                     f'text-anchor="middle">{raw:g}</text>')
    for i, (label, pts) in enumerate(sorted(series.items())):
        color = PALETTE[i % len(PALETTE)]
        pts = sorted(pts)
        coords = " ".join(f"{px(x):.1f},{py(y):.1f}" for x, y in pts)
        parts.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="2"/>')
        for x, y in pts:
            parts.append(f'<circle cx="{px(x):.1f}" cy="{py(y):.1f}" r="3" fill="{color}"/>')
        parts.append(f'<text x="{WIDTH - MARGIN + 4}" y="{MARGIN + 16 * i + 10}" '
                     f'fill="{color}">{label}</text>')
    parts.append("</svg>")
    with open(path, "w") as f:
        f.write("\n".join(parts) + "\n")


def write_plot_manifest(path, title, x_label, y_label, series_names, csv_path) -> None:
    manifest = {
        "title": title,
        "axes": {"x": x_label, "y": y_label},
        "series": sorted(series_names),
        "source_csv": str(csv_path),
    }
    with open(path, "w") as f:
        json.dump(manifest, f, sort_keys=True, indent=2)
        f.write("\n")
