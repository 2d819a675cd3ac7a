"""Full-knowledge reference implementations used as ground truth."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .grid import Direction, GridCoord, direction_between, neighbor, neighbors, proj, rotate


def _set(S: Iterable) -> set[GridCoord]:
    return {GridCoord(*c) for c in S}


def oracle_stripe(S: Iterable, u, d: Direction) -> set[GridCoord]:
    perp = rotate(Direction(d), 90)
    pu = proj(u, perp)
    return {v for v in _set(S) if proj(v, perp) == pu}


def oracle_stripe_ids(S: Iterable, u, d: Direction) -> dict[GridCoord, int]:
    pu = proj(u, d)
    return {v: proj(v, d) - pu for v in _set(S)}


def oracle_maxima(S: Iterable, R: Iterable, d: Direction) -> set[GridCoord]:
    R = _set(R)
    best = max(proj(v, d) for v in R)
    return {v for v in R if proj(v, d) == best}


def oracle_f_d(R: Iterable, w, d: Direction) -> int:
    pw = proj(w, d)
    return sum(1 for x in _set(R) if proj(x, d) > pw)


# ------------------------------------------------------------ boundaries


@dataclass
class OracleBoundary:
    region: frozenset  # empty nodes of the region (clipped to the inflated box)
    outer: bool
    cycle: list[tuple[GridCoord, GridCoord | None, GridCoord | None]]  # (node, pred, succ)

    @property
    def members(self) -> set[GridCoord]:
        return {c[0] for c in self.cycle}

    @property
    def turn_sum(self) -> int:
        total = 0
        for v, p, s in self.cycle:
            if p is None:
                total += 6
                continue
            a = direction_between(v, p).dir6
            b = direction_between(v, s).dir6
            # empty run strictly between a and b counterclockwise
            run = (b - a) % 6 - 1
            if run < 0:
                run += 6
            total += run - 2
        return total


def empty_regions(S: Iterable) -> list[tuple[frozenset, bool]]:
    """Flood fill of the complement inside the bounding box inflated by 1."""
    S = _set(S)
    qs = [c.q for c in S]
    rs = [c.r for c in S]
    q0, q1, r0, r1 = min(qs) - 1, max(qs) + 1, min(rs) - 1, max(rs) + 1
    inside = lambda c: q0 <= c.q <= q1 and r0 <= c.r <= r1  # noqa: E731
    seen: set = set()
    out = []
    for q in range(q0, q1 + 1):
        for r in range(r0, r1 + 1):
            c = GridCoord(q, r)
            if c in S or c in seen:
                continue
            comp = {c}
            stack = [c]
            seen.add(c)
            touches = False
            while stack:
                x = stack.pop()
                if x.q in (q0, q1) or x.r in (r0, r1):
                    touches = True
                for y in neighbors(x):
                    if inside(y) and y not in S and y not in seen:
                        seen.add(y)
                        comp.add(y)
                        stack.append(y)
            out.append((frozenset(comp), touches))
    return out


def _trace(S: set, region: frozenset) -> list[tuple]:
    """Walk the boundary of one region with the region on the right."""
    occ = []
    for v in sorted(S):
        nb = neighbors(v)
        filled = [w in S for w in nb]
        if not any(filled):
            if v in {w for r in region for w in neighbors(r)}:
                return [(v, None, None)]
            continue
        for e in range(6):
            if not filled[e] and filled[(e - 1) % 6] and nb[e] in region:
                length = 0
                while not filled[(e + length) % 6]:
                    length += 1
                occ.append((v, e, length))
    if not occ:
        return []
    by_key = {}
    for v, e, L in occ:
        for i in range(L):
            by_key[(v, (e + i) % 6)] = (v, e, L)
    start = min(occ)
    out = []
    cur = start
    while True:
        v, e, L = cur
        pred = neighbors(v)[(e - 1) % 6]
        succ = neighbors(v)[(e + L) % 6]
        out.append((v, pred, succ))
        shared = neighbors(v)[(e + L - 1) % 6]
        cur = by_key[(succ, direction_between(succ, shared).dir6)]
        if cur == start:
            break
    return out


def oracle_boundaries(S: Iterable) -> list[OracleBoundary]:
    """Boundary cycles per empty region adjacent to ``S``."""
    S = _set(S)
    out = []
    for region, touches in empty_regions(S):
        cyc = _trace(S, region)
        if cyc:
            out.append(OracleBoundary(region, touches, cyc))
    return out


def boundary_amoebots(S: Iterable) -> set[GridCoord]:
    S = _set(S)
    return {v for v in S if any(w not in S for w in neighbors(v))}


# -------------------------------------------------------------- skeleton


def _runs(S: set, v: GridCoord) -> list[tuple[int, int]]:
    """Maximal cyclic runs ``(start, length)`` of empty neighbors, counterclockwise."""
    nb = neighbors(v)
    filled = [w in S for w in nb]
    if not any(filled):
        return [(0, 6)]
    out = []
    for e in range(6):
        if not filled[e] and filled[(e - 1) % 6]:
            L = 0
            while not filled[(e + L) % 6]:
                L += 1
            out.append((e, L))
    return out


def _occ_of(v: GridCoord, run: tuple[int, int]) -> tuple:
    e, L = run
    if L == 6:
        return (v, None, None)
    nb = neighbors(v)
    return (v, nb[(e - 1) % 6], nb[(e + L) % 6])


@dataclass
class OracleSkeleton:
    cycle: list[tuple]
    split: GridCoord
    starts: dict  # region -> u_B
    targets: dict  # region -> (v_B, region of v_B's chosen boundary)
    paths: dict  # region -> [u_B, ..., v_B]
    ranks: dict  # region -> rank


def oracle_skeleton(S: Iterable, d: Direction, s: int = 1) -> OracleSkeleton:
    """The canonical skeleton built with global knowledge.

    The negative sign mirrors the structure, builds the positive skeleton for
    the mirrored direction and maps it back.
    """
    from .grid import mirror_coord, mirror_direction

    d = Direction(d)
    if s == -1:
        mS = [mirror_coord(c) for c in _set(S)]
        sk = oracle_skeleton(mS, mirror_direction(d), 1)
        mc = lambda c: None if c is None else mirror_coord(c)  # noqa: E731
        return OracleSkeleton(
            cycle=[tuple(mc(c) for c in o) for o in sk.cycle], split=mirror_coord(sk.split),
            starts={k: mirror_coord(v) for k, v in sk.starts.items()},
            targets={k: (mirror_coord(v[0]), v[1]) for k, v in sk.targets.items()},
            paths={k: [mirror_coord(c) for c in p] for k, p in sk.paths.items()}, ranks=sk.ranks)
    S = _set(S)
    dp = d if d.on_axis else rotate(d, 30)
    perp = rotate(d, 90)
    regions = empty_regions(S)
    region_of = {}
    for ri, (reg, _) in enumerate(regions):
        for c in reg:
            region_of[c] = ri
    outer = next(ri for ri, (_, t) in enumerate(regions) if t)
    # boundary members per region and their cycles (list of occurrences)
    members: dict[int, set] = {}
    for v in S:
        for w in neighbors(v):
            if w not in S:
                members.setdefault(region_of[w], set()).add(v)
    cycles = {}
    for ri in members:
        cycles[ri] = _trace(S, regions[ri][0])

    def f_d(w):
        return sum(1 for x in S if proj(x, d) > proj(w, d))

    ranks = {ri: (-1 if ri == outer else min(f_d(w) for w in members[ri])) for ri in members}

    def start_of(ri):
        B = members[ri]
        top = max(proj(w, d) for w in B)
        Bd = [w for w in B if proj(w, d) == top]
        best = max(proj(w, perp) for w in Bd)
        cands = [w for w in Bd if proj(w, perp) == best]
        assert len(cands) == 1
        return cands[0]

    def run_toward(v, e6):
        return next(r for r in _runs(S, v) if (e6 - r[0]) % 6 < r[1])

    def forward(v):
        for e in (rotate(dp, 60).dir6, dp.dir6, rotate(dp, -60).dir6):
            w = neighbors(v)[e]
            if w not in S:
                return run_toward(v, e), region_of[w]
        raise AssertionError("no forward boundary")

    starts, targets, paths = {}, {}, {}
    child_at: dict[tuple, int] = {}  # occurrence tuple on the parent -> child region
    for ri in members:
        if ri == outer:
            continue
        u = starts[ri] = start_of(ri)
        path = [u]
        v = u
        while True:
            other = any(w not in S and region_of[w] != ri for w in neighbors(v))
            if other:
                break
            v = neighbor(v, dp)
            assert v in S
            path.append(v)
        run, parent = forward(v)
        targets[ri] = (v, parent)
        paths[ri] = path
        child_at[_occ_of(v, run)] = ri

    def expand(ri, first_pred, last_succ):
        """Cycle of region ``ri`` starting at its start occurrence, splicing children."""
        u = starts[ri]
        cyc = cycles[ri]
        i0 = next(i for i, o in enumerate(cyc) if o[0] == u)
        seq = cyc[i0:] + cyc[:i0]
        x, y = seq[0][1], seq[0][2]
        out = [(u, first_pred, y)]
        for o in seq[1:]:
            out.extend(_splice(o, *o))
        out.append((u, x, last_succ))
        return out

    def _splice(orig, node, pred, succ):
        ci = child_at.get(orig)
        if ci is None:
            return [(node, pred, succ)]
        path = paths[ci]
        if len(path) == 1:
            # trivial path: enter the child's cycle right here
            return expand(ci, pred, succ)
        t = len(path) - 1
        out = [(node, pred, path[t - 1])]
        for i in range(t - 1, 0, -1):
            out.append((path[i], path[i + 1], path[i - 1]))
        out.extend(expand(ci, path[1], path[1]))
        for i in range(1, t):
            out.append((path[i], path[i - 1], path[i + 1]))
        out.append((node, path[t - 1], succ))
        return out

    # splitting point on the outer boundary
    B = members[outer]
    top = max(proj(w, d) for w in B)
    Bd = [w for w in B if proj(w, d) == top]
    best = max(proj(w, perp) for w in Bd)
    uo = next(w for w in Bd if proj(w, perp) == best)
    split_occ = _occ_of(uo, run_toward(uo, dp.dir6))
    cyc = cycles[outer]
    i0 = cyc.index(split_occ)
    seq = cyc[i0:] + cyc[:i0]
    full = []
    for o in seq:
        full.extend(_splice(o, *o))
    return OracleSkeleton(cycle=full, split=uo, starts=starts, targets=targets, paths=paths, ranks=ranks)


# --------------------------------------------------------- spanning tree


def oracle_spanning_check(edges: Iterable, S: Iterable) -> bool:
    """Acyclic, connected and spanning with exactly ``n - 1`` bonds of ``S``."""
    S = _set(S)
    E = [tuple(e) for e in edges]
    if len(E) != len(S) - 1:
        return False
    parent = {v: v for v in S}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e in E:
        if len(e) != 2:
            return False
        a, b = (GridCoord(*c) for c in e)
        if a not in S or b not in S or b not in neighbors(a):
            return False
        ra, rb = find(a), find(b)
        if ra == rb:
            return False
        parent[ra] = rb
    return True


def oracle_first_occurrence_edges(path: Sequence) -> set[frozenset]:
    """Edges from each path amoebot's first occurrence to that occurrence's predecessor."""
    seen = set()
    out = set()
    for i, p in enumerate(path):
        p = GridCoord(*p)
        if p in seen:
            continue
        seen.add(p)
        if i > 0:
            out.add(frozenset((p, GridCoord(*path[i - 1]))))
    return out


# -------------------------------------------------------------- symmetry


@dataclass
class OracleSymmetry:
    rot2: bool
    rot3: bool
    rot6: bool
    reflections: dict  # Direction -> bool, axis through the structure along that direction


def _maps_onto_translate(S: set, image: list[GridCoord]) -> bool:
    """True iff ``image`` is ``S`` shifted by some vector.

    A lattice symmetry of a finite set fixes its centroid, so the map composed
    with the right translation is the symmetry itself; lexicographic minima
    pin that translation down.
    """
    lo, ilo = min(S), min(image)
    t = (lo[0] - ilo[0], lo[1] - ilo[1])
    return {GridCoord(c[0] + t[0], c[1] + t[1]) for c in image} == S


def reflect_coord(v, axis: Direction) -> GridCoord:
    """Reflection about a line along ``axis`` through the origin."""
    from .grid import mirror_coord, rotate_coord

    # mirror_coord reflects about the N axis; an axis at 30*i degrees is 60*i after it
    return rotate_coord(mirror_coord(v), int(axis) % 6)


def oracle_symmetry(S: Iterable) -> OracleSymmetry:
    """Rotational and reflection symmetries by direct coordinate maps."""
    from .grid import rotate_coord

    S = _set(S)
    rot = {k: _maps_onto_translate(S, [rotate_coord(c, k) for c in S]) for k in (1, 2, 3)}
    refl = {d: _maps_onto_translate(S, [reflect_coord(c, d) for c in S]) for d in Direction}
    return OracleSymmetry(rot2=rot[3], rot3=rot[2], rot6=rot[1], reflections=refl)
