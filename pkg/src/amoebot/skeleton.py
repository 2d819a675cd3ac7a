"""Canonical skeletons, skeleton paths and spanning trees.

Boundary cycles are fused into one cycle along straight paths: every inner
boundary ``B`` sends a path from its starting point ``u_B`` (the maximum of
``B``'s maxima in direction ``d`` w.r.t. ``d`` rotated by 90 degrees) straight
in direction ``d_p`` up to the first amoebot ``v_B`` of another boundary.  The
cycle leaves the parent boundary at ``v_B``, walks down the path, runs around
``B`` and walks back up, so it never crosses itself.

Skeletons are stored as ``(node, pred, succ)`` occurrences; a pointer table
keyed by ``(node, pred)`` is what the amoebots hold locally.

The negative sign is the positive construction seen with mirrored chirality:
the structure is mirrored, processed with the mirrored direction and mapped
back.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .engine import AmoebotWorld
from .grid import PROJ_COEFFS, Direction, GridCoord, mirror_coord, mirror_direction, neighbor, rotate
from .pasc import ChainRef, Substrate, chain_substrate, pasc_run
from .primitives import BoundarySet, Occurrence, chain_circuit, detect_boundaries, local_boundaries
from .spatial import substrate_maxima

Occ = tuple  # (node, pred | None, succ | None)


class SkeletonError(RuntimeError):
    pass


@dataclass
class Skeleton:
    d: Direction
    s: int
    cycle: list[Occ]  # in traversal order, starting at the splitting occurrence
    split: GridCoord
    paths: list[list[GridCoord]] = field(default_factory=list)  # u_B .. v_B
    starts: list[GridCoord] = field(default_factory=list)  # u_B per inner boundary
    rounds: int = 0

    def successor_table(self) -> dict:
        return {(v, p): s for v, p, s in self.cycle}


def principal_direction(d: Direction, s: int = 1) -> Direction:
    """``d`` for grid-axis directions, else ``d`` turned 30 degrees with sign ``s``."""
    d = Direction(d)
    return d if d.on_axis else rotate(d, 30, s)


def forward_run(occs: Sequence[Occurrence], dp: Direction, sign: int = 1) -> Occurrence | None:
    """The local boundary holding the first empty node among dp+60, dp, dp-60 (rotations with ``sign``)."""
    for e in (rotate(dp, 60, sign).dir6, dp.dir6, rotate(dp, -60, sign).dir6):
        for o in occs:
            if e in o.empty_dirs:
                return o
    return None


# ----------------------------------------------------------- distributed


def _cycle_substrate_builder(world: AmoebotWorld, chains: list[ChainRef]):
    base = chain_substrate(world, chains, closed=True)
    xy = np.array([p for ch in chains for p in ch.positions], dtype=np.int64).reshape(-1, 2)

    def build(dirs, refs):
        coeff = np.array([PROJ_COEFFS[int(d)] for d in dirs], dtype=np.int64)[base.instance]
        p = coeff[:, 0] * xy[:, 0] + coeff[:, 1] * xy[:, 1]
        stripe = p - p[np.asarray(refs)][base.instance]
        return Substrate(amoebot=base.amoebot, local=base.local, stripe=stripe, instance=base.instance,
                         links=base.links, pins_needed=base.pins_needed)

    return build, base


def _boundary_starts(world: AmoebotWorld, bs: list[BoundarySet], d: Direction, tag: str):
    """Per boundary: flags of the maxima-of-maxima occurrences (parallel over boundaries)."""
    chains = [b.chain for b in bs]
    build, base = _cycle_substrate_builder(world, chains)
    circ = chain_circuit(world, chains, closed=True)
    race_sets = np.array([x for row in circ.sets for x in row], dtype=np.int64)
    inst = base.instance
    G = len(bs)
    allR = np.ones(base.size, dtype=bool)
    first = substrate_maxima(world, build, inst, [d] * G, allR, circ.graph, race_sets, tag=f"{tag}:d")
    second = substrate_maxima(world, build, inst, [rotate(d, 90)] * G, first.flags, circ.graph, race_sets,
                              tag=f"{tag}:d90")
    out = []
    pos = 0
    for b in bs:
        out.append([o for i, o in enumerate(b.cycle) if second.flags[pos + i]])
        pos += len(b.cycle)
    return out


def _path_round(world: AmoebotWorld, starts: list[GridCoord], dp: Direction) -> set[GridCoord]:
    """Straight-line circuits in direction ``dp``: inner amoebots relay, boundary amoebots stop.

    Returns the amoebots that heard a start beep.
    """
    e, back = dp.dir6, (dp.dir6 + 3) % 6
    psid = world.new_psid()
    inner = (world.nbr >= 0).all(axis=1)
    has_f = world.nbr[:, e] >= 0
    has_b = world.nbr[:, back] >= 0
    psid[has_b, back, 0] = 0
    psid[has_f & inner, e, 0] = 0
    psid[has_f & ~inner, e, 0] = 1
    graph = world.circuits(psid, 2)
    beeps = np.zeros((world.n, 2), dtype=bool)
    for u in starts:
        beeps[world.index[u], 1] = True
    rec = world.beep_round(graph, beeps, tag="skeleton:paths")
    return {world.coords[i] for i in np.nonzero(rec[:, 0] & has_b)[0]}


def _skeleton_plus(world: AmoebotWorld, d: Direction) -> Skeleton:
    start_round = world.round
    d = Direction(d)
    dp = principal_direction(d, 1)
    bs = detect_boundaries(world)
    flagged = _boundary_starts(world, bs, d, "skeleton")
    table: dict = {}
    for b in bs:
        for o in b.cycle:
            table[(o.node, o.pred)] = o.succ
    inner_starts: list[tuple[BoundarySet, Occurrence]] = []
    outer_occ = None
    for b, occs in zip(bs, flagged):
        nodes = {o.node for o in occs}
        if len(nodes) != 1:
            raise SkeletonError(f"boundary has {len(nodes)} starting amoebots")
        if b.kind == "inner":
            if len(occs) != 1:
                raise SkeletonError("inner starting point occurs more than once")
            inner_starts.append((b, occs[0]))
        else:
            u = occs[0].node
            cands = [o for o in local_boundaries(world, u) if dp.dir6 in o.empty_dirs]
            outer_occ = cands[0]
    if outer_occ is None:
        raise SkeletonError("no outer boundary")
    # starting amoebots with a second local boundary already sit on another boundary
    nontrivial = [o.node for _, o in inner_starts if len(local_boundaries(world, o.node)) == 1]
    heard = _path_round(world, nontrivial, dp) if inner_starts else set()
    touched: set = set()

    def put(key, val):
        if key in touched:
            raise SkeletonError(f"pointer {key} spliced twice")
        touched.add(key)
        table[key] = val

    paths = []
    for b, ob in inner_starts:
        u = ob.node
        path = [u]
        if u in nontrivial:
            w = neighbor(u, dp)
            while True:
                if w not in heard:
                    raise SkeletonError("straight path lost its circuit")
                path.append(w)
                if _is_boundary(world, w):
                    break
                w = neighbor(w, dp)
        v = path[-1]
        ov = forward_run(local_boundaries(world, v), dp)
        if ov is None:
            raise SkeletonError(f"{tuple(v)} has no boundary ahead")
        x, y, x2, y2 = ob.pred, ob.succ, ov.pred, ov.succ
        if len(path) == 1:
            put((u, x2), y)
            put((u, x), y2)
        else:
            t = len(path) - 1
            put((v, x2), path[t - 1])
            put((v, path[t - 1]), y2)
            put((u, path[1]), y)
            put((u, x), path[1])
            for i in range(1, t):
                put((path[i], path[i + 1]), path[i - 1])
                put((path[i], path[i - 1]), path[i + 1])
        paths.append(path)
    key = (outer_occ.node, outer_occ.pred)
    cycle = []
    cur = key
    while True:
        node, pred = cur
        succ = table[cur]
        cycle.append((node, pred, succ))
        if succ is None:
            break
        cur = (succ, node)
        if cur == key:
            break
        if len(cycle) > 4 * world.bonds + 2:
            raise SkeletonError("successor pointers do not close a cycle")
    return Skeleton(d=d, s=1, cycle=cycle, split=outer_occ.node, paths=paths,
                    starts=[o.node for _, o in inner_starts], rounds=world.round - start_round)


def _is_boundary(world: AmoebotWorld, v) -> bool:
    return bool((world.nbr[world.index[v]] < 0).any())


def _mirror_occ(o: Occ) -> Occ:
    return tuple(None if c is None else mirror_coord(c) for c in o)


def canonical_skeleton(world: AmoebotWorld, d: Direction, s: int = 1) -> Skeleton:
    """The canonical ``(d, s)``-skeleton, cut at its splitting point."""
    d = Direction(d)
    if s not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    world.require_pins(4, "canonical skeleton")
    if s == 1:
        return _skeleton_plus(world, d)
    mw = AmoebotWorld([mirror_coord(c) for c in world.coords], pins_per_edge=world.pins_per_edge,
                      seed=world.seed)
    mw.trace = [] if world.trace is not None else None
    sk = _skeleton_plus(mw, mirror_direction(d))
    world.round += mw.round
    if world.trace is not None:
        for rec in mw.trace:
            world.trace.append({**rec, "round": world.round - mw.round + rec["round"]})
    return Skeleton(d=d, s=-1, cycle=[_mirror_occ(o) for o in sk.cycle], split=mirror_coord(sk.split),
                    paths=[[mirror_coord(c) for c in p] for p in sk.paths],
                    starts=[mirror_coord(c) for c in sk.starts], rounds=sk.rounds)


def skeleton_path(sk: Skeleton) -> ChainRef:
    """The skeleton cut open at its splitting occurrence."""
    return ChainRef([o[0] for o in sk.cycle], 0)


# ----------------------------------------------------------- spanning tree


@dataclass
class SpanningTree:
    edges: set[frozenset]
    root: GridCoord
    path_edges: set[frozenset]
    rounds: int = 0


def spanning_tree(world: AmoebotWorld, path: ChainRef) -> SpanningTree:
    """Tree from a skeleton path.

    PASC numbers the path occurrences from the first one; every path amoebot
    links to the predecessor of its lowest-numbered occurrence.  All other
    amoebots are inner amoebots and link to their northern neighbor.
    """
    start = world.round
    if path.ref_index != 0:
        path = ChainRef(path.positions, 0)
    ids = pasc_run(world, path)
    best: dict[GridCoord, tuple[int, int]] = {}
    for i, (p, v) in enumerate(zip(path.positions, ids.ids)):
        if p not in best or v < best[p][0]:
            best[p] = (v, i)
    path_edges = set()
    for p, (_, i) in best.items():
        if i > 0:
            path_edges.add(frozenset((p, path.positions[i - 1])))
    world.idle_rounds(1, tag="tree:notify-pred")
    edges = set(path_edges)
    for c in world.coords:
        if c not in best:
            edges.add(frozenset((c, neighbor(c, Direction.N))))
    world.idle_rounds(1, tag="tree:notify-north")
    return SpanningTree(edges=edges, root=path.positions[0], path_edges=path_edges, rounds=world.round - start)
