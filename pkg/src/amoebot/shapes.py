"""Named and random amoebot structures plus the plain-text structure format."""

from __future__ import annotations

import random
from typing import Iterable, TextIO

from .grid import GridCoord, is_connected, neighbors, rotate_coord

LINE3 = [GridCoord(0, 0), GridCoord(1, 0), GridCoord(2, 0)]
TRIANGLE = [GridCoord(0, 0), GridCoord(1, 0), GridCoord(0, 1)]
RING = [GridCoord(*c) for c in [(0, 1), (1, 0), (1, -1), (0, -1), (-1, 0), (-1, 1)]]
HEXAGON7 = RING + [GridCoord(0, 0)]


class ParseError(ValueError):
    def __init__(self, line: int, msg: str):
        super().__init__(f"line {line}: {msg}")
        self.line = line


def parse_structure(text_or_file: str | TextIO) -> list[GridCoord]:
    """One ``q r`` pair per line; ``#`` starts a comment."""
    text = text_or_file if isinstance(text_or_file, str) else text_or_file.read()
    out = []
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        if len(parts) != 2:
            raise ParseError(no, f"expected two integers, got {raw!r}")
        try:
            out.append(GridCoord(int(parts[0]), int(parts[1])))
        except ValueError:
            raise ParseError(no, f"not an integer pair: {raw!r}") from None
    return out


def format_structure(coords: Iterable) -> str:
    return "".join(f"{c[0]} {c[1]}\n" for c in sorted(GridCoord(*c) for c in coords))


def line(n: int) -> list[GridCoord]:
    return [GridCoord(i, 0) for i in range(n)]


def hexagon(radius: int) -> list[GridCoord]:
    """All nodes within grid distance ``radius`` of the origin."""
    out = []
    for q in range(-radius, radius + 1):
        for r in range(-radius, radius + 1):
            if max(abs(q), abs(r), abs(q + r)) <= radius:
                out.append(GridCoord(q, r))
    return out


def hex_ring(radius: int) -> list[GridCoord]:
    return [c for c in hexagon(radius) if max(abs(c.q), abs(c.r), abs(c.q + c.r)) == radius]


def triangle(side: int) -> list[GridCoord]:
    return [GridCoord(q, r) for q in range(side) for r in range(side - q)]


def random_blob(n: int, seed: int, hole_prob: float = 0.0) -> list[GridCoord]:
    """Seeded random growth from the origin.

    Each step adds a uniformly chosen free neighbor of the blob.  With
    probability ``hole_prob`` a step also removes a random amoebot whose six
    neighbors are all occupied; such removals keep the blob connected and
    leave a hole that is never refilled.
    """
    if n < 1:
        raise ValueError("n must be positive")
    rng = random.Random(seed)
    S = {GridCoord(0, 0)}
    members = [GridCoord(0, 0)]
    banned: set = set()
    frontier: list[GridCoord] = []
    fset: set = set()

    def push(v):
        for w in neighbors(v):
            if w not in S and w not in banned and w not in fset:
                fset.add(w)
                frontier.append(w)

    push(GridCoord(0, 0))
    while len(S) < n:
        if not frontier:
            break
        i = rng.randrange(len(frontier))
        v = frontier[i]
        frontier[i] = frontier[-1]
        frontier.pop()
        fset.discard(v)
        if v in S or v in banned:
            continue
        S.add(v)
        members.append(v)
        push(v)
        if hole_prob and rng.random() < hole_prob:
            for _ in range(8):
                c = members[rng.randrange(len(members))]
                if c in S and all(w in S for w in neighbors(c)):
                    S.discard(c)
                    banned.add(c)
                    break
    return sorted(S)


def blob_with_holes(n: int, holes: int, seed: int) -> list[GridCoord]:
    """A random blob of ``n`` amoebots with up to ``holes`` extra single-node holes punched in."""
    rng = random.Random(seed)
    S = set(random_blob(n + holes, seed))
    made = 0
    order = sorted(S)
    rng.shuffle(order)
    for c in order:
        if made == holes:
            break
        if c in S and all(w in S for w in neighbors(c)):
            S.discard(c)
            made += 1
    return sorted(S)


def rotate60(coords: Iterable, times: int = 1) -> list[GridCoord]:
    return sorted(rotate_coord(c, times) for c in coords)


def check_structure(coords: Iterable) -> bool:
    return is_connected(coords)
