"""SVG rendering on the hexagonal dual: every amoebot is a hexagonal cell.

Output is a pure function of the inputs; elements are emitted in sorted
order and coordinates are printed with fixed precision.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

from .grid import GridCoord, cartesian

SCALE = 20.0
CELL_R = 1 / math.sqrt(3)  # circumradius of a unit-distance hexagonal cell


def _xy(v) -> tuple[float, float]:
    x, y = cartesian(v)
    return x * SCALE, -y * SCALE


def _fmt(x: float) -> str:
    s = f"{x:.2f}"
    return "0.00" if s == "-0.00" else s


def _hexagon(v) -> str:
    cx, cy = _xy(v)
    pts = []
    for i in range(6):
        a = math.radians(60 * i)
        pts.append(f"{_fmt(cx + CELL_R * SCALE * math.cos(a))},{_fmt(cy - CELL_R * SCALE * math.sin(a))}")
    return " ".join(pts)


def render_svg(coords: Iterable, *, boundary: Iterable = (), highlight: Iterable = (),
               path: Sequence | None = None, edges: Iterable = (), split=None, title: str | None = None) -> str:
    """Cells of ``coords``; boundary cells red, highlighted cells yellow, ``path`` and ``edges`` as blue lines."""
    cells = sorted(GridCoord(*c) for c in coords)
    boundary = {GridCoord(*c) for c in boundary}
    highlight = {GridCoord(*c) for c in highlight}
    if not cells:
        raise ValueError("nothing to render")
    xs = [_xy(c)[0] for c in cells]
    ys = [_xy(c)[1] for c in cells]
    pad = SCALE
    x0, y0 = min(xs) - pad, min(ys) - pad
    w, h = max(xs) - min(xs) + 2 * pad, max(ys) - min(ys) + 2 * pad
    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
           f'viewBox="{_fmt(x0)} {_fmt(y0)} {_fmt(w)} {_fmt(h)}" width="{_fmt(w)}" height="{_fmt(h)}">']
    if title:
        out.append(f"<title>{_escape(title)}</title>")
    for c in cells:
        fill = "#f4d03f" if c in highlight else ("#e74c3c" if c in boundary else "#d5d8dc")
        out.append(f'<polygon points="{_hexagon(c)}" fill="{fill}" stroke="#566573" stroke-width="1"/>')
    for e in sorted(tuple(sorted(GridCoord(*v) for v in e)) for e in edges):
        (ax, ay), (bx, by) = _xy(e[0]), _xy(e[1])
        out.append(f'<line x1="{_fmt(ax)}" y1="{_fmt(ay)}" x2="{_fmt(bx)}" y2="{_fmt(by)}" '
                   f'stroke="#1f4e9c" stroke-width="2"/>')
    if path:
        pts = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in (_xy(GridCoord(*v)) for v in path))
        out.append(f'<polyline points="{pts}" fill="none" stroke="#2e86de" stroke-width="2"/>')
    if split is not None:
        sx, sy = _xy(GridCoord(*split))
        out.append(f'<circle cx="{_fmt(sx)}" cy="{_fmt(sy)}" r="{_fmt(SCALE * 0.25)}" fill="#000000"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _escape(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
