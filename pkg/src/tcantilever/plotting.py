"""Self-contained SVG line plots (no external assets)."""

from __future__ import annotations

import math
from datetime import datetime, timezone
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 800, 500
MARGIN = dict(left=80, right=30, top=40, bottom=60)
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def nice_ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    """Round tick positions covering ``[lo, hi]``."""
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / target
    mag = 10 ** math.floor(math.log10(raw))
    step = min((s * mag for s in (1, 2, 2.5, 5, 10) if s * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step - 1e-9) * step
    ticks = []
    t = start
    while t <= hi + 1e-9 * step:
        ticks.append(round(t, 12))
        t += step
    return ticks


def _fmt(v):
    return f"{v:.2f}"


def line_plot(series, xlabel, ylabel, title="", markers=(), timestamp=True) -> str:
    """Render polylines to an SVG string.

    Args:
        series: Sequence of ``(label, xs, ys)``.
        markers: Sequence of ``(label, x, y)`` points drawn as circles.
        timestamp: Embed the generation time as a comment.
    """
    xs_all = [x for _, xs, _ in series for x in xs]
    ys_all = [y for _, _, ys in series for y in ys]
    x0, x1 = min(xs_all), max(xs_all)
    y0, y1 = min(ys_all), max(ys_all)
    pad = 0.05 * (y1 - y0 or abs(y1) or 1.0)
    y0, y1 = y0 - pad, y1 + pad
    xt, yt = nice_ticks(x0, x1), nice_ticks(y0, y1)
    x0, x1 = min(x0, xt[0]), max(x1, xt[-1])
    y0, y1 = min(y0, yt[0]), max(y1, yt[-1])

    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def px(x):
        return MARGIN["left"] + (x - x0) / (x1 - x0) * pw

    def py(y):
        return MARGIN["top"] + (1 - (y - y0) / (y1 - y0)) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" '
        f'width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">',
    ]
    if timestamp:
        out.append(f"<!-- generated {datetime.now(timezone.utc).isoformat(timespec='seconds')} -->")
    out.append(f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>')
    if title:
        out.append(f'<text x="{WIDTH / 2}" y="24" text-anchor="middle" font-size="15">{escape(title)}</text>')
    left, right = MARGIN["left"], WIDTH - MARGIN["right"]
    top, bottom = MARGIN["top"], HEIGHT - MARGIN["bottom"]
    out.append(f'<g class="axes" stroke="black" fill="none">')
    out.append(f'<line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}"/>')
    out.append(f'<line x1="{left}" y1="{top}" x2="{left}" y2="{bottom}"/>')
    for t in xt:
        out.append(f'<line x1="{_fmt(px(t))}" y1="{bottom}" x2="{_fmt(px(t))}" y2="{bottom + 6}"/>')
    for t in yt:
        out.append(f'<line x1="{left - 6}" y1="{_fmt(py(t))}" x2="{left}" y2="{_fmt(py(t))}"/>')
    out.append("</g>")
    out.append('<g class="ticks">')
    for t in xt:
        out.append(f'<text x="{_fmt(px(t))}" y="{bottom + 20}" text-anchor="middle">{t:g}</text>')
    for t in yt:
        out.append(f'<text x="{left - 10}" y="{_fmt(py(t) + 4)}" text-anchor="end">{t:g}</text>')
    out.append("</g>")
    out.append(f'<text x="{(left + right) / 2}" y="{HEIGHT - 15}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(
        f'<text x="20" y="{(top + bottom) / 2}" text-anchor="middle" '
        f'transform="rotate(-90 20 {(top + bottom) / 2})">{escape(ylabel)}</text>'
    )
    for i, (label, xs, ys) in enumerate(series):
        color = COLORS[i % len(COLORS)]
        pts = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in zip(xs, ys))
        out.append(
            f'<polyline class="series" data-label="{escape(label)}" fill="none" stroke="{color}" '
            f'stroke-width="2" points="{pts}"/>'
        )
        out.append(f'<text x="{right - 150}" y="{top + 18 * (i + 1)}" fill="{color}">{escape(label)}</text>')
    for label, x, y in markers:
        out.append(
            f'<circle class="marker" data-label="{escape(label)}" cx="{_fmt(px(x))}" cy="{_fmt(py(y))}" '
            f'r="5" fill="none" stroke="black" stroke-width="2"/>'
        )
        out.append(f'<text x="{_fmt(px(x) + 8)}" y="{_fmt(py(y) - 8)}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
