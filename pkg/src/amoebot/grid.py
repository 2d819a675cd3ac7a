"""Geometry of the infinite triangular grid.

Coordinates are axial: ``q`` counts steps along ENE = (1, 0) and ``r`` along
N = (0, 1).  The cartesian embedding is ``(q*sqrt(3)/2, q/2 + r)``.

The twelve cardinal directions sit on a 30-degree ring, counterclockwise from
N.  Even ring indices lie along grid axes (``D_M``), odd ones are
perpendicular to an axis (``D_P``).  Only ``D_M`` directions are grid edges;
they are also indexed 0..5 ("dir6") in the same counterclockwise order, which
is what pin labels use.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable, NamedTuple


class GridCoord(NamedTuple):
    q: int
    r: int

    def __add__(self, other):  # type: ignore[override]
        return GridCoord(self.q + other[0], self.r + other[1])

    def __sub__(self, other):
        return GridCoord(self.q - other[0], self.r - other[1])


class Direction(IntEnum):
    N = 0
    NNW = 1
    WNW = 2
    W = 3
    WSW = 4
    SSW = 5
    S = 6
    SSE = 7
    ESE = 8
    E = 9
    ENE = 10
    NNE = 11

    @property
    def on_axis(self) -> bool:
        """True for directions in D_m (along a grid axis)."""
        return self % 2 == 0

    @property
    def dir6(self) -> int:
        if not self.on_axis:
            raise ValueError(f"{self.name} is not a grid-edge direction")
        return self // 2

    @classmethod
    def from_dir6(cls, k: int) -> "Direction":
        return cls((k % 6) * 2)

    @classmethod
    def parse(cls, name: str) -> "Direction":
        try:
            return cls[name.strip().upper()]
        except KeyError:
            raise ValueError(f"unknown direction {name!r}") from None


D_M = tuple(d for d in Direction if d.on_axis)
D_P = tuple(d for d in Direction if not d.on_axis)

# axial offsets for dir6 = 0..5 (N, WNW, WSW, S, ESE, ENE)
OFFSETS6 = ((0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1), (1, 0))

# integer projection coefficients (cq, cr) per ring index; proj_d(v) = cq*q + cr*r
_PROJ = {
    Direction.N: (1, 2),
    Direction.NNW: (0, 1),
    Direction.WNW: (-1, 1),
    Direction.W: (-1, 0),
    Direction.WSW: (-2, -1),
    Direction.SSW: (-1, -1),
    Direction.S: (-1, -2),
    Direction.SSE: (0, -1),
    Direction.ESE: (1, -1),
    Direction.E: (1, 0),
    Direction.ENE: (2, 1),
    Direction.NNE: (1, 1),
}
PROJ_COEFFS = tuple(_PROJ[Direction(i)] for i in range(12))


@dataclass(frozen=True)
class Axis:
    anchor: GridCoord
    dir: Direction


def neighbor(v, d: Direction) -> GridCoord:
    d = Direction(d)
    if not d.on_axis:
        raise ValueError(f"no grid edge in direction {d.name}")
    dq, dr = OFFSETS6[d.dir6]
    return GridCoord(v[0] + dq, v[1] + dr)


def neighbors(v) -> list[GridCoord]:
    return [GridCoord(v[0] + dq, v[1] + dr) for dq, dr in OFFSETS6]


def direction_between(u, v) -> Direction:
    """Direction of the grid edge from ``u`` to the adjacent node ``v``."""
    delta = (v[0] - u[0], v[1] - u[1])
    try:
        return Direction.from_dir6(OFFSETS6.index(delta))
    except ValueError:
        raise ValueError(f"{tuple(u)} and {tuple(v)} are not adjacent") from None


def rotate(d: Direction, degrees: int, sign: int = 1) -> Direction:
    """Rotate ``d`` counterclockwise (sign=+1) or clockwise (sign=-1)."""
    if degrees % 30:
        raise ValueError(f"rotation must be a multiple of 30 degrees, got {degrees}")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    return Direction((int(d) + sign * (degrees // 30)) % 12)


def opposite(d: Direction) -> Direction:
    return rotate(d, 180)


def proj(v, d: Direction) -> int:
    cq, cr = PROJ_COEFFS[int(d)]
    return cq * v[0] + cr * v[1]


def on_axis(v, axis: Axis) -> bool:
    perp = rotate(axis.dir, 90)
    return proj(v, perp) == proj(axis.anchor, perp)


def cartesian(v) -> tuple[float, float]:
    q, r = v
    return (q * 3 ** 0.5 / 2, q / 2 + r)


def are_adjacent(u, v) -> bool:
    return (v[0] - u[0], v[1] - u[1]) in OFFSETS6


def is_connected(coords: Iterable) -> bool:
    nodes = {GridCoord(*c) for c in coords}
    if not nodes:
        return False
    start = next(iter(nodes))
    seen = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for w in neighbors(v):
            if w in nodes and w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(nodes)


# lattice automorphisms --------------------------------------------------


def rotate_coord(v, times: int = 1) -> GridCoord:
    """Rotate a coordinate about the origin by ``times`` * 60 degrees counterclockwise."""
    q, r = v
    for _ in range(times % 6):
        q, r = -r, q + r
    return GridCoord(q, r)


def mirror_coord(v) -> GridCoord:
    """Reflect across the N-S axis through the origin."""
    q, r = v
    return GridCoord(-q, q + r)


def mirror_direction(d: Direction) -> Direction:
    return Direction((-int(d)) % 12)


def rotate_structure(coords: Iterable, times: int = 1) -> list[GridCoord]:
    return [rotate_coord(c, times) for c in coords]


def mirror_structure(coords: Iterable) -> list[GridCoord]:
    return [mirror_coord(c) for c in coords]
