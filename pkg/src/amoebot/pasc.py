"""Primary-and-secondary circuits (PASC) on chains and chains of stripes.

Every participating node owns a primary and a secondary partition set.  A node
is wired to its predecessor straight (P-P, S-S) when passive and crossed
(P-S, S-P) when active.  Per iteration the reference beeps on its primary
circuit; a node that hears it on its secondary set reads bit 1, otherwise
bit 0, and active nodes that read 1 turn passive and announce it in a second
round.  A silent second round ends the run.

The same loop drives three substrates: plain chains (node = occurrence,
stripe = chain position), the stripes of a whole structure (node = amoebot,
stripe = projection) and boundary cycles (node = occurrence, stripe =
projection).  Links between stripes two apart occur for grid-axis
directions; the node on the far side then crosses with the parity of its own
stripe and of the skipped stripe, whose state it tracks from the signals it
receives.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .engine import AmoebotWorld, InvalidPinCount
from .grid import GridCoord, direction_between


class BitIndexOutOfRange(ValueError):
    pass


class LambdaExceedsChain(ValueError):
    pass


@dataclass
class ChainRef:
    """An ordered amoebot sequence (repeats allowed) with a reference position."""

    positions: list[GridCoord]
    ref_index: int = 0

    def __post_init__(self):
        self.positions = [GridCoord(*p) for p in self.positions]
        if not self.positions:
            raise ValueError("empty chain")
        if not 0 <= self.ref_index < len(self.positions):
            raise ValueError("reference index outside the chain")
        for a, b in zip(self.positions, self.positions[1:]):
            direction_between(a, b)  # raises when not neighbors

    def __len__(self):
        return len(self.positions)

    @property
    def occurrences(self) -> list[tuple[GridCoord, int]]:
        seen: dict[GridCoord, int] = {}
        out = []
        for p in self.positions:
            k = seen.get(p, 0)
            out.append((p, k))
            seen[p] = k + 1
        return out


def twos_complement(bits: Sequence[int]) -> int:
    """Value of an LSB-first two's-complement bit sequence."""
    if not len(bits):
        return 0
    v = sum(int(b) << i for i, b in enumerate(bits[:-1]))
    return v - (int(bits[-1]) << (len(bits) - 1))


def ceil_log2(m: int) -> int:
    return (m - 1).bit_length() if m > 1 else 0


# ------------------------------------------------------------- substrate


@dataclass
class Substrate:
    """Nodes with primary/secondary partition sets and the links between them.

    ``links`` rows are ``(a, b, dir6 from a to b, base slot)``; ``dir6 = -1``
    marks a link inside one amoebot (realized by merging partition sets).
    """

    amoebot: np.ndarray
    local: np.ndarray
    stripe: np.ndarray
    instance: np.ndarray
    links: np.ndarray
    pins_needed: int = 2
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def size(self) -> int:
        return int(self.amoebot.shape[0])

    @property
    def nsets(self) -> int:
        return 2 * int(self.local.max()) + 2 if self.size else 2

    def prepared(self, world: AmoebotWorld):
        """Flat pin indices and link-end metadata, computed once."""
        c = self._cache.get("prep")
        if c is not None:
            return c
        k = world.pins_per_edge
        if k < self.pins_needed:
            raise InvalidPinCount(f"substrate needs {self.pins_needed} pins per edge, world has {k}")
        L = self.links
        ext = L[L[:, 2] >= 0]
        inner = L[L[:, 2] < 0]
        # both ends of every external link
        x = np.concatenate([ext[:, 0], ext[:, 1]])
        y = np.concatenate([ext[:, 1], ext[:, 0]])
        d = np.concatenate([ext[:, 2], (ext[:, 2] + 3) % 6])
        base = np.concatenate([ext[:, 3], ext[:, 3]])
        amo = self.amoebot[x]
        idx0 = (amo * 6 + d) * k + base
        delta = self.stripe[y] - self.stripe[x]
        if np.any(np.abs(delta) > 2):
            raise ValueError("linked nodes more than two stripes apart")
        # internal links: orient so that ``hi`` is the higher stripe
        a, b = inner[:, 0], inner[:, 1]
        swap = self.stripe[a] > self.stripe[b]
        lo = np.where(swap, b, a)
        hi = np.where(swap, a, b)
        c = dict(x=x, amo=amo, idx0=idx0, idx1=idx0 + 1, delta=delta,
                 lo=lo, hi=hi, idelta=self.stripe[hi] - self.stripe[lo],
                 gP=self.amoebot * self.nsets + 2 * self.local)
        skip = np.zeros(self.size, dtype=bool)
        skip[x[delta == -2]] = True
        skip[hi[c["idelta"] == 2]] = True
        c["skip"] = skip
        if np.any(np.abs(c["idelta"]) > 2):
            raise ValueError("linked nodes more than two stripes apart")
        self._cache["prep"] = c
        return c


def _crossing(delta, active, tracked):
    return ((delta == -1) & active) | ((delta == -2) & (active ^ tracked))


@dataclass
class PascRun:
    """Bits emitted by one PASC execution (LSB first) and its cost."""

    bits: np.ndarray  # (nodes, iterations) uint8
    nbits: np.ndarray  # per instance: bits read (iterations executed)
    iterations: np.ndarray  # per instance: iterations with a non-silent second round
    rounds: int
    instance: np.ndarray
    instance_rounds: np.ndarray  # per instance, as if it ran alone

    def node_bits(self, i: int) -> list[int]:
        return self.bits[i, : self.nbits[self.instance[i]]].tolist()

    def values(self) -> np.ndarray:
        out = np.zeros(self.bits.shape[0], dtype=np.int64)
        for i in range(self.bits.shape[0]):
            out[i] = twos_complement(self.node_bits(i))
        return out


def run_pasc(world: AmoebotWorld, sub: Substrate, refs: Sequence[int], *,
             stop_after: int | None = None, initially_active: np.ndarray | None = None,
             tag: str = "pasc") -> PascRun:
    """Execute PASC on every instance of ``sub`` in lockstep.

    ``refs`` holds one reference node per instance.  ``stop_after`` ends every
    instance after that many iterations (used for bit replays).
    """
    prep = sub.prepared(world)
    N = sub.size
    ninst = int(sub.instance.max()) + 1 if N else 0
    nsets = sub.nsets
    refs = np.asarray(refs, dtype=np.int64)
    if refs.shape[0] != ninst:
        raise ValueError("need exactly one reference per instance")
    active = np.ones(N, dtype=bool) if initially_active is None else initially_active.copy()
    active[refs] = True
    tracked = np.ones(N, dtype=bool)
    running = np.ones(ninst, dtype=bool)
    nbits = np.zeros(ninst, dtype=np.int64)
    nonsilent = np.zeros(ninst, dtype=np.int64)
    bit_cols: list[np.ndarray] = []
    cut = np.zeros(ninst, dtype=bool)
    gP = prep["gP"]
    gS = gP + 1
    start_round = world.round
    flat_size = world.n * 6 * world.pins_per_edge
    lo, hi, idelta = prep["lo"], prep["hi"], prep["idelta"]
    it = 0
    while running.any():
        if stop_after is not None and it >= stop_after:
            break
        it += 1
        world.idle_rounds(1, tag=f"{tag}:it{it}:reconfigure")
        # wiring for this iteration
        cross = _crossing(prep["delta"], active[prep["x"]], tracked[prep["x"]])
        base_set = 2 * sub.local[prep["x"]]
        psid = np.full(flat_size, -1, dtype=np.int64)
        psid[prep["idx0"]] = base_set + cross
        psid[prep["idx1"]] = base_set + 1 - cross
        psid = psid.reshape(world.n, 6, world.pins_per_edge)
        if lo.shape[0]:
            icross = _crossing(-idelta, active[hi], tracked[hi])
            merges = np.concatenate([
                np.stack([gP[lo], np.where(icross, gS[hi], gP[hi])], axis=1),
                np.stack([gS[lo], np.where(icross, gP[hi], gS[hi])], axis=1)])
        else:
            merges = None
        graph = world.circuits(psid, nsets, merges)
        # round 1: references beep on their primary sets
        beeps = np.zeros(world.n * nsets, dtype=bool)
        live_refs = refs[running]
        beeps[gP[live_refs]] = True
        rec = graph.deliver(beeps).reshape(-1)
        world_round_tag = f"{tag}:it{it}:r1"
        world.round += 1
        if world.trace is not None:
            world.trace.append({"round": world.round, "tag": world_round_tag,
                                "beeped": sorted(set(graph.labels[beeps].tolist()))})
        recP = rec[gP]
        recS = rec[gS]
        bit = recS & ~recP
        live_node = running[sub.instance]
        col = np.where(live_node, bit, 0).astype(np.uint8)
        bit_cols.append(col)
        nbits[running] += 1
        if stop_after is not None and it >= stop_after:
            cut = running.copy()  # these skip the second round of their last iteration
            break
        passivate = active & bit & live_node
        # the skipped stripe below hears P exactly when our lane toward it carries P
        pred_lane = np.where(active, recS, recP)
        pred_bit = ~pred_lane
        pred_pass = tracked & pred_bit & live_node & prep["skip"]
        # round 2: announce passivation (own S, or the lane carrying the skipped stripe's S)
        beeps2 = np.zeros(world.n * nsets, dtype=bool)
        beeps2[gS[passivate]] = True
        on_behalf = np.where(active, gP, gS)
        beeps2[on_behalf[pred_pass]] = True
        rec2 = graph.deliver(beeps2).reshape(-1)
        world.round += 1
        if world.trace is not None:
            world.trace.append({"round": world.round, "tag": f"{tag}:it{it}:r2",
                                "beeped": sorted(set(graph.labels[beeps2].tolist()))})
        heard = rec2[gP] | rec2[gS]
        inst_heard = np.zeros(ninst, dtype=bool)
        inst_heard[sub.instance[heard]] = True
        nonsilent[running & inst_heard] += 1
        running &= inst_heard
        active &= ~passivate
        tracked &= ~pred_pass
    bits = np.stack(bit_cols, axis=1) if bit_cols else np.zeros((N, 0), dtype=np.uint8)
    return PascRun(bits=bits, nbits=nbits, iterations=nonsilent,
                   rounds=world.round - start_round, instance=sub.instance,
                   instance_rounds=3 * nbits - cut.astype(np.int64))


# ----------------------------------------------------------------- chains


def link_bases(pairs: Sequence[tuple]) -> list[int]:
    """Base pin slot per traversed bond: repeated traversals get consecutive pairs."""
    count: dict = {}
    out = []
    for a, b in pairs:
        key = (min(a, b), max(a, b))
        c = count.get(key, 0)
        count[key] = c + 1
        out.append(2 * c)
    return out


def chain_links(chain: ChainRef, closed: bool = False) -> list[tuple[GridCoord, GridCoord]]:
    p = chain.positions
    pairs = list(zip(p, p[1:]))
    if closed and len(p) > 1:
        pairs.append((p[-1], p[0]))
    return pairs


def chain_substrate(world: AmoebotWorld, chains: Sequence[ChainRef], closed: bool = False,
                    stripes: Sequence[Sequence[int]] | None = None) -> Substrate:
    """Substrate with one node per occurrence, one instance per chain.

    Amoebots appearing on several chains (or several times on one) get
    separate partition-set pairs, and every traversal of a bond its own pair
    of pins.
    """
    amo, loc, stp, inst = [], [], [], []
    used: dict[int, int] = {}
    pairs: list = []
    ends: list = []
    node = 0
    for ci, ch in enumerate(chains):
        start = node
        for i, p in enumerate(ch.positions):
            ai = world.index[p]
            amo.append(ai)
            loc.append(used.get(ai, 0))
            used[ai] = used.get(ai, 0) + 1
            stp.append(stripes[ci][i] if stripes is not None else i)
            inst.append(ci)
            node += 1
        m = len(ch)
        for i, pr in enumerate(chain_links(ch, closed)):
            pairs.append(pr)
            ends.append((start + i, start + (i + 1) % m))
    bases = link_bases(pairs)
    links = [(x, y, direction_between(a, b).dir6, base)
             for (x, y), (a, b), base in zip(ends, pairs, bases)]
    links_arr = np.array(links, dtype=np.int64).reshape(-1, 4)
    return Substrate(amoebot=np.array(amo, dtype=np.int64), local=np.array(loc, dtype=np.int64),
                     stripe=np.array(stp, dtype=np.int64), instance=np.array(inst, dtype=np.int64),
                     links=links_arr, pins_needed=max(bases, default=0) + 2)


@dataclass
class ChainIds:
    ids: list[int]
    bits: list[list[int]]
    iterations: int
    rounds: int


def pasc_run(world: AmoebotWorld, chain: ChainRef) -> ChainIds:
    """Identifiers ``i - r`` along a chain via PASC, read off the circuit beeps."""
    sub = chain_substrate(world, [chain])
    run = run_pasc(world, sub, [chain.ref_index], tag="pasc")
    bits = [run.node_bits(i) for i in range(len(chain))]
    return ChainIds(ids=[twos_complement(b) for b in bits], bits=bits,
                    iterations=int(run.iterations[0]), rounds=run.rounds)


def pasc_replay(world: AmoebotWorld, chain: ChainRef, j: int, bit_count: int | None = None) -> list[int]:
    """Bit ``j`` of every identifier, recomputed from scratch.

    ``bit_count`` is the number of identifier bits the chain uses (known from
    an earlier full run); it defaults to ``ceil(log2 m)``.
    """
    limit = ceil_log2(len(chain)) if bit_count is None else bit_count
    if not 0 <= j < max(limit, 0) or j < 0:
        raise BitIndexOutOfRange(f"bit {j} outside 0..{limit - 1}")
    sub = chain_substrate(world, [chain])
    run = run_pasc(world, sub, [chain.ref_index], stop_after=j + 1, tag=f"replay{j}")
    out = []
    for i in range(len(chain)):
        b = run.node_bits(i)
        # a finished run keeps sign-extending
        out.append(b[j] if j < len(b) else (b[-1] if b else 0))
    return out


# ---------------------------------------------------------- block primitive


@dataclass
class BlockMarks:
    block: int
    marks: list[int]
    rounds: int


def mark_position(world: AmoebotWorld, chain: ChainRef, lam: int) -> int | None:
    """Locate ``A_lam`` with ``lam = 2 * ceil(log m) + 4``-style counting.

    Two PASC runs from ``A_0`` each forward a marker one step per non-silent
    iteration; the remaining steps are forwarded directly.  Returns the
    position reached (``None`` when the marker leaves the chain).
    """
    pos = 0
    steps = 0
    for _ in range(2):
        ids = pasc_run(world, ChainRef(chain.positions, 0))
        for _ in range(ids.iterations):
            if steps < lam:
                pos += 1
                steps += 1
                world.idle_rounds(1, tag="marker")
    while steps < lam:
        pos += 1
        steps += 1
        world.idle_rounds(1, tag="marker")
    return pos if pos < len(chain) else None


def block_primitive(world: AmoebotWorld, chain: ChainRef, lam: int) -> BlockMarks:
    """Leave exactly the positions ``i * 2**ceil(log lam)`` active."""
    m = len(chain)
    if lam < 1:
        raise ValueError("lambda must be >= 1")
    if lam > m:
        raise LambdaExceedsChain(f"lambda {lam} exceeds chain length {m}")
    if chain.ref_index != 0:
        chain = ChainRef(chain.positions, 0)
    start = world.round
    sub = chain_substrate(world, [chain])
    prep = sub.prepared(world)
    gP = prep["gP"]
    nsets = sub.nsets
    k = world.pins_per_edge
    active = np.ones(m, dtype=bool)
    marker = lam if lam < m else None
    # ``check`` wiring uses slot ``base`` of each link: passive nodes join both
    # sides, active nodes other than A_0 keep the two sides apart
    links = sub.links
    while True:
        psid = np.full(world.n * 6 * k, -1, dtype=np.int64)
        for a, b, e, base in links:
            # pin of node a toward b, and of b toward a
            for node, d in ((a, e), (b, (e + 3) % 6)):
                psid[(sub.amoebot[node] * 6 + d) * k + base] = (
                    2 * sub.local[node] + (1 if (active[node] and node != 0 and node == b) else 0))
        graph = world.circuits(psid.reshape(world.n, 6, k), nsets)
        beeps = np.zeros(world.n * nsets, dtype=bool)
        beeps[gP[0]] = True
        rec = world.beep_round(graph, beeps.reshape(world.n, nsets), tag="block:check").reshape(-1)
        heard = rec[gP] | rec[gP + 1]
        if marker is not None and heard[marker]:
            world.idle_rounds(1, tag="block:done")
            break
        if active[1:].sum() == 0:
            break
        # one more PASC iteration from the current activity
        run = run_pasc(world, sub, [0], stop_after=1, initially_active=active, tag="block")
        bit = run.bits[:, 0].astype(bool)
        world.idle_rounds(1, tag="block:r2")
        active &= ~bit
    marks = [i for i in range(m) if active[i]]
    block = marks[1] if len(marks) > 1 else 1 << ceil_log2(lam)
    return BlockMarks(block=block, marks=marks, rounds=world.round - start)


# ----------------------------------------------------- per-amoebot program


@dataclass(frozen=True)
class PascState:
    """Constant-size local state; emitted bits leave through ``bit``."""

    phase: int = 0  # 0: wire and beep the reference, 1: read bit and announce
    active: bool = True
    done: bool = False
    started: bool = False
    passivating: bool = False
    bit: int | None = None


class PascProgram:
    """PASC on a chain visiting each amoebot once, driven by ``AmoebotWorld.step``.

    Two rounds per iteration: in the first the reference beeps on its primary
    set, in the second every amoebot interprets the beep and freshly passive
    amoebots beep on their secondary set.  A silent second round ends the run.
    """

    def __init__(self, chain: ChainRef):
        if len(set(chain.positions)) != len(chain.positions):
            raise ValueError("the program form needs a chain without repeated amoebots")
        self.ref = chain.positions[chain.ref_index]
        self.links: dict[GridCoord, tuple[int | None, int | None]] = {}
        p = chain.positions
        for i, v in enumerate(p):
            pred = direction_between(v, p[i - 1]).dir6 if i > 0 else None
            succ = direction_between(v, p[i + 1]).dir6 if i + 1 < len(p) else None
            self.links[v] = (pred, succ)

    def initial_state(self, view) -> PascState:
        if view.pins_per_edge < 2:
            raise InvalidPinCount("PASC needs 2 pins per edge")
        return PascState()

    def _sets(self, coord, active: bool) -> list[frozenset]:
        if coord not in self.links:
            return []
        pred, succ = self.links[coord]
        P, S = set(), set()
        if succ is not None:
            P.add((succ, 0))
            S.add((succ, 1))
        if pred is not None:
            if active:
                P.add((pred, 1))
                S.add((pred, 0))
            else:
                P.add((pred, 0))
                S.add((pred, 1))
        return [frozenset(P), frozenset(S)]

    def activate(self, view, state: PascState, received):
        from .engine import ActivationResult

        member = view.coord in self.links
        if not member or state.done:
            return ActivationResult(state, self._sets(view.coord, state.active) if member else [], set())
        is_ref = view.coord == self.ref
        if state.phase == 0:
            if state.started and not any(received):
                return ActivationResult(PascState(done=True, active=state.active, started=True,
                                                  bit=None), self._sets(view.coord, state.active), set())
            active = state.active and not state.passivating
            nxt = PascState(phase=1, active=active, started=True)
            return ActivationResult(nxt, self._sets(view.coord, active), {0} if is_ref else set())
        bit = 1 if (len(received) > 1 and received[1]) else 0
        passivating = state.active and bit == 1 and not is_ref
        nxt = PascState(phase=0, active=state.active, started=True, passivating=passivating, bit=bit)
        return ActivationResult(nxt, self._sets(view.coord, state.active), {1} if passivating else set())


def run_pasc_program(world: AmoebotWorld, chain: ChainRef, max_rounds: int = 10_000) -> list[list[int]]:
    """Drive ``PascProgram`` to completion; returns the LSB-first bits per position."""
    from .engine import run_until

    prog = PascProgram(chain)
    world.install(prog)
    idx = [world.index[p] for p in chain.positions]
    bits: list[list[int]] = [[] for _ in idx]

    def finished(w):
        return all(w.states[i].done for i in idx)

    rounds = 0
    while not finished(world):
        if rounds >= max_rounds:
            run_until(world, finished, 1)
        world.step()
        rounds += 1
        for pos, i in enumerate(idx):
            st = world.states[i]
            if st.phase == 0 and st.bit is not None and not st.done:
                bits[pos].append(st.bit)
    return bits
