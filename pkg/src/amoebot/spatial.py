"""Spatial identifiers by stripes, the stripe algorithm and global maxima.

All amoebots with equal ``proj_d`` form one stripe and act as one PASC chain
element.  Bonds between neighboring stripes carry the primary/secondary
lanes; bonds inside a stripe connect straight.  For grid-axis directions a
bond may skip one stripe (which may be unoccupied); the amoebot on the far
side then simulates the skipped stripe from the signals it receives.

The functions accept a world that may hold several disjoint copies of a
structure (``groups``), so independent runs share the same rounds.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .engine import AmoebotWorld, CircuitGraph
from .grid import PROJ_COEFFS, Direction, GridCoord, proj, rotate
from .pasc import PascRun, Substrate, run_pasc
from .primitives import elect_until_unique


class ReferenceNotOccupied(ValueError):
    pass


class EmptySubset(ValueError):
    pass


@dataclass
class StripeIds:
    ids: dict[GridCoord, int]
    rounds: int
    iterations: int


def _coords_array(world: AmoebotWorld) -> np.ndarray:
    arr = getattr(world, "_coord_array", None)
    if arr is None:
        arr = np.array(world.coords, dtype=np.int64).reshape(-1, 2)
        world._coord_array = arr
    return arr


def _bonds(world: AmoebotWorld) -> np.ndarray:
    """Rows ``(u, v, dir6 u->v)`` for every bond with ``u < v``."""
    b = getattr(world, "_bond_array", None)
    if b is None:
        u, e = np.nonzero(world.nbr >= 0)
        v = world.nbr[u, e]
        keep = u < v
        b = np.stack([u[keep], v[keep], e[keep]], axis=1).astype(np.int64)
        world._bond_array = b
    return b


def stripe_substrate(world: AmoebotWorld, group: np.ndarray, dirs: Sequence[Direction],
                     refs: Sequence[int]) -> Substrate:
    """One instance per group; node ``i`` is amoebot ``i``; stripe = projection offset."""
    xy = _coords_array(world)
    coeff = np.array([PROJ_COEFFS[int(d)] for d in dirs], dtype=np.int64)
    c = coeff[group]
    p = c[:, 0] * xy[:, 0] + c[:, 1] * xy[:, 1]
    refs = np.asarray(refs, dtype=np.int64)
    stripe = p - p[refs][group]
    b = _bonds(world)
    links = np.concatenate([b, np.zeros((b.shape[0], 1), dtype=np.int64)], axis=1)
    return Substrate(amoebot=np.arange(world.n, dtype=np.int64), local=np.zeros(world.n, dtype=np.int64),
                     stripe=stripe, instance=group.astype(np.int64), links=links, pins_needed=2)


def stripe_run(world: AmoebotWorld, dirs: Sequence[Direction], refs: Sequence[int],
               group: np.ndarray | None = None, stop_after: int | None = None, tag: str = "stripe") -> PascRun:
    if group is None:
        group = np.zeros(world.n, dtype=np.int64)
    sub = stripe_substrate(world, group, dirs, refs)
    return run_pasc(world, sub, refs, stop_after=stop_after, tag=tag)


def stripe_identifiers(world: AmoebotWorld, d: Direction, u_r) -> StripeIds:
    """``id(v) = proj_d(v) - proj_d(u_r)`` for every amoebot, via stripe PASC."""
    u_r = GridCoord(*u_r)
    if u_r not in world.index:
        raise ReferenceNotOccupied(f"{tuple(u_r)} is not occupied")
    start = world.round
    run = stripe_run(world, [Direction(d)], [world.index[u_r]])
    vals = run.values()
    return StripeIds({c: int(vals[i]) for i, c in enumerate(world.coords)},
                     rounds=world.round - start, iterations=int(run.iterations[0]))


def stripe_batch(world: AmoebotWorld, group: np.ndarray, dirs: Sequence[Direction],
                 refs: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    """Stripe membership for many (reference, direction) tasks on disjoint copies.

    Returns the membership flag per amoebot and the rounds each task used
    (three per PASC iteration).
    """
    perp = [rotate(Direction(d), 90) for d in dirs]
    run = stripe_run(world, perp, refs, group=group)
    flags = np.ones(world.n, dtype=bool)
    # identifier 0 <=> every emitted bit is 0
    for j in range(run.bits.shape[1]):
        live = j < run.nbits[group]
        flags &= ~(live & (run.bits[:, j] == 1))
    return flags, run.instance_rounds


def stripe_algorithm(world: AmoebotWorld, u, d: Direction) -> dict[GridCoord, bool]:
    """Membership in the stripe through ``u`` along ``d``: identifiers w.r.t. ``d`` rotated by 90."""
    u = GridCoord(*u)
    if u not in world.index:
        raise ReferenceNotOccupied(f"{tuple(u)} is not occupied")
    flags, _ = stripe_batch(world, np.zeros(world.n, dtype=np.int64), [Direction(d)], [world.index[u]])
    return {c: bool(flags[i]) for i, c in enumerate(world.coords)}


# ---------------------------------------------------------------- maxima


@dataclass
class MaximaResult:
    flags: np.ndarray  # per amoebot
    rounds: np.ndarray  # per group, as if the group ran alone
    reference: list[int]


COUNTER_ROUNDS = 2  # compare + increment of a boundary-chain counter


def substrate_maxima(world: AmoebotWorld, build: Callable[[Sequence[Direction], Sequence[int]], Substrate],
                     instance: np.ndarray, dirs: Sequence[Direction], R: np.ndarray,
                     race: CircuitGraph, race_sets: np.ndarray, tag: str = "maxima") -> MaximaResult:
    """Global maxima of the flagged nodes of every instance, all instances in lockstep.

    ``build(dirs, refs)`` returns the PASC substrate whose stripes are the
    projections relative to the per-instance references; ``race_sets`` maps
    every node to its partition set on the instance's race circuit.

    1. elect a reference among the flagged nodes of each instance;
    2. a full PASC fixes the identifier width ``T`` per instance;
    3. MSB first, flagged nodes still in the race beep their bit on the race
       circuit (after recomputing that bit with a truncated PASC run); a node
       that stays silent while hearing a beep drops out.  The sign bit is
       handled with reversed roles, so negative identifiers lose.
    """
    G = int(instance.max()) + 1
    if np.any(np.bincount(instance[R], minlength=G) == 0):
        raise EmptySubset("R is empty")
    cands: list[list[int]] = [[] for _ in range(G)]
    for i in np.nonzero(R)[0]:
        cands[instance[i]].append(int(i))
    el = elect_until_unique(world, [[int(race_sets[i]) for i in c] for c in cands], race, tag=f"{tag}:elect")
    refs = [cands[g][el.leaders[g]] for g in range(G)]
    sub = build(dirs, refs)
    full = run_pasc(world, sub, refs, tag=f"{tag}:width")
    T = full.nbits
    per_group = el.rounds + full.instance_rounds
    alive = R.copy()
    total = race.labels.shape[0]
    for j in range(int(T.max()) - 1, -1, -1):
        world.idle_rounds(COUNTER_ROUNDS, tag=f"{tag}:counter")
        run = run_pasc(world, sub, refs, stop_after=j + 1, tag=f"{tag}:bit{j}")
        bit = run.bits[:, j].astype(bool)
        in_play = j < T[instance]  # instances with fewer bits sit this position out
        sign = j == T[instance] - 1
        send = alive & in_play & np.where(sign, ~bit, bit)
        beeps = np.zeros(total, dtype=bool)
        beeps[race_sets[send]] = True
        rec = world.beep_round(race, beeps.reshape(race.n, race.nsets), tag=f"{tag}:race").reshape(-1)
        alive &= ~(in_play & ~send & rec[race_sets])
        per_group = per_group + np.where(j < T, COUNTER_ROUNDS + run.instance_rounds + 1, 0)
    return MaximaResult(flags=alive, rounds=per_group, reference=refs)


def maxima_batch(world: AmoebotWorld, group: np.ndarray, dirs: Sequence[Direction],
                 R: np.ndarray, tag: str = "maxima") -> MaximaResult:
    """Global maxima on every disjoint copy (``group``) of the world."""
    return substrate_maxima(world, lambda ds, refs: stripe_substrate(world, group, ds, refs),
                            group, dirs, R, world.global_circuit(), np.arange(world.n), tag=tag)


def global_maxima(world: AmoebotWorld, R, d: Direction) -> dict[GridCoord, bool]:
    """Flags the members of ``R`` with maximal ``proj_d``."""
    mask = np.zeros(world.n, dtype=bool)
    if isinstance(R, np.ndarray) and R.dtype == bool:
        mask[:] = R
    else:
        for c in R:
            mask[world.index[GridCoord(*c)]] = True
    if not mask.any():
        raise EmptySubset("R is empty")
    res = maxima_batch(world, np.zeros(world.n, dtype=np.int64), [Direction(d)], mask)
    return {c: bool(res.flags[i]) for i, c in enumerate(world.coords)}


def f_d_oracle_hook(world: AmoebotWorld, R, w, d: Direction) -> int:
    """Number of ``R`` members strictly beyond ``w`` in direction ``d``."""
    w = GridCoord(*w)
    if w not in world.index:
        raise ReferenceNotOccupied(f"{tuple(w)} is not occupied")
    pw = proj(w, d)
    return sum(1 for x in R if proj(x, d) > pw)


# ------------------------------------------------------------ batching


def disjoint_copies(coords: Sequence, copies: int) -> tuple[list[GridCoord], np.ndarray, int]:
    """Translate ``copies`` copies of a structure far apart along the q axis.

    Returns the combined coordinates, the copy id of every amoebot in the
    sorted world order, and the per-copy offset.  Within a copy the sorted
    order equals the sorted order of the original.
    """
    cs = sorted(GridCoord(*c) for c in coords)
    qs = [c.q for c in cs]
    width = max(qs) - min(qs) + 3
    out = [GridCoord(c.q + j * width, c.r) for j in range(copies) for c in cs]
    group = np.repeat(np.arange(copies, dtype=np.int64), len(cs))
    return out, group, width


def copies_world(coords: Sequence, copies: int, pins_per_edge: int = 2,
                 seed: int = 0) -> tuple[AmoebotWorld, np.ndarray]:
    """The world of ``disjoint_copies(coords, copies)`` and the copy id per amoebot, built by tiling."""
    base = AmoebotWorld(coords, pins_per_edge=pins_per_edge, seed=seed)
    qs = [c.q for c in base.coords]
    world = AmoebotWorld.tiled(base, copies, max(qs) - min(qs) + 3)
    return world, np.repeat(np.arange(copies, dtype=np.int64), base.n)

