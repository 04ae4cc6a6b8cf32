"""Minimal SVG 1.1 log-log line chart (one series per file)."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

WIDTH, HEIGHT, PAD = 640, 420, 60


def _ticks(lo: float, hi: float) -> list[float]:
    return [10.0**k for k in range(math.floor(lo), math.ceil(hi) + 1)]


def loglog_svg(xs: Sequence[float], ys: Sequence[float], title: str, xlabel: str, ylabel: str) -> str:
    pts = [(math.log10(x), math.log10(y)) for x, y in zip(xs, ys) if x > 0 and y > 0]
    if not pts:
        raise ValueError("nothing positive to plot on log axes")
    lx = [p[0] for p in pts]
    ly = [p[1] for p in pts]
    x0, x1 = min(lx), max(lx)
    y0, y1 = min(ly), max(ly)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5

    def sx(v):
        return PAD + (v - x0) / (x1 - x0) * (WIDTH - 2 * PAD)

    def sy(v):
        return HEIGHT - PAD - (v - y0) / (y1 - y0) * (HEIGHT - 2 * PAD)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="24" text-anchor="middle" font-size="16">{escape(title)}</text>',
        f'<line x1="{PAD}" y1="{HEIGHT - PAD}" x2="{WIDTH - PAD}" y2="{HEIGHT - PAD}" stroke="black"/>',
        f'<line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{HEIGHT - PAD}" stroke="black"/>',
        f'<text x="{WIDTH / 2}" y="{HEIGHT - 15}" text-anchor="middle" font-size="13">{escape(xlabel)}</text>',
        f'<text x="18" y="{HEIGHT / 2}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 18 {HEIGHT / 2})">{escape(ylabel)}</text>',
    ]
    for t in _ticks(x0, x1):
        v = math.log10(t)
        if x0 <= v <= x1:
            out.append(f'<text x="{sx(v):.2f}" y="{HEIGHT - PAD + 18}" text-anchor="middle" font-size="11">{t:g}</text>')
    for t in _ticks(y0, y1):
        v = math.log10(t)
        if y0 <= v <= y1:
            out.append(f'<text x="{PAD - 6}" y="{sy(v) + 4:.2f}" text-anchor="end" font-size="11">{t:g}</text>')
    path = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in pts)
    out.append(f'<polyline points="{path}" fill="none" stroke="#1f5fa8" stroke-width="2"/>')
    for a, b in pts:
        out.append(f'<circle cx="{sx(a):.2f}" cy="{sy(b):.2f}" r="3" fill="#1f5fa8"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_loglog_svg(path, xs, ys, title: str, xlabel: str, ylabel: str) -> None:
    Path(path).write_text(loglog_svg(xs, ys, title, xlabel, ylabel), encoding="utf-8")
