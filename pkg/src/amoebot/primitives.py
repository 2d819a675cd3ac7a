"""Building blocks shared by the higher-level algorithms.

Global circuit, randomized leader election on disjoint candidate circuits,
synchronization of concurrent procedures, sums modulo a constant along a
chain, and the boundary cycles with their inner/outer classification.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .engine import AmoebotWorld, CircuitGraph, RoundBudgetExhausted
from .grid import GridCoord, OFFSETS6, direction_between
from .pasc import ChainRef, Substrate, ceil_log2, chain_links, link_bases, run_pasc


class EmptyCandidateSet(ValueError):
    pass


def global_circuit(world: AmoebotWorld) -> CircuitGraph:
    """Every amoebot joins all its pins into one partition set."""
    return world.global_circuit()


# ------------------------------------------------------------ chain circuits


@dataclass
class ChainCircuit:
    graph: CircuitGraph
    sets: list[list[int]]  # global partition-set id per occurrence, per chain


def chain_circuit(world: AmoebotWorld, chains: Sequence[ChainRef], closed: bool = False) -> ChainCircuit:
    """One circuit per chain, one lane per bond traversal (slots split by traversal)."""
    used: dict[int, int] = {}
    locs: list[list[int]] = []
    for ch in chains:
        row = []
        for p in ch.positions:
            a = world.index[p]
            row.append(used.get(a, 0))
            used[a] = used.get(a, 0) + 1
        locs.append(row)
    nsets = max(used.values(), default=0) or 1
    pairs, ends = [], []
    for ci, ch in enumerate(chains):
        m = len(ch)
        for i, pr in enumerate(chain_links(ch, closed)):
            pairs.append(pr)
            ends.append((ci, i, (i + 1) % m))
    bases = link_bases(pairs)
    world.require_pins(max(bases, default=0) // 2 + 1, "chain circuit")
    psid = world.new_psid()
    for (a, b), (ci, i, j), base in zip(pairs, ends, bases):
        e = direction_between(a, b).dir6
        psid[world.index[a], e, base // 2] = locs[ci][i]
        psid[world.index[b], (e + 3) % 6, base // 2] = locs[ci][j]
    graph = world.circuits(psid, nsets)
    sets = [[world.index[p] * nsets + locs[ci][i] for i, p in enumerate(ch.positions)]
            for ci, ch in enumerate(chains)]
    return ChainCircuit(graph, sets)


# ----------------------------------------------------------- leader election


@dataclass
class LeaderResult:
    leaders: list[int | None]  # position of the leader within each candidate set
    survivors: list[list[int]]
    phases: list[int]  # phases after which each set had a single candidate (-1: never)
    completed: bool
    rounds: int


def default_phase_budget(n: int) -> int:
    return 4 * max(1, ceil_log2(n))


def leader_election(world: AmoebotWorld, candidate_sets: Sequence[Sequence[int]] | None = None,
                    graph: CircuitGraph | None = None, phases: int | None = None,
                    tag: str = "elect") -> LeaderResult:
    """Coin-flip elimination run for a fixed phase budget.

    ``candidate_sets`` lists, per set, the global partition-set ids of its
    candidates in ``graph`` (default: every amoebot on the global circuit).
    In each one-round phase the surviving candidates draw a fair bit and beep
    on their circuit on heads; a candidate holding tails that hears a beep
    withdraws.  Amoebots cannot detect that one candidate is left, so the whole
    budget is always charged.
    """
    if graph is None:
        graph = world.global_circuit()
    if candidate_sets is None:
        candidate_sets = [list(range(world.n))]
    sets = [list(s) for s in candidate_sets]
    for s in sets:
        if not s:
            raise EmptyCandidateSet("a candidate set is empty")
    labels = [{int(graph.labels[c]) for c in s} for s in sets]
    for i in range(len(sets)):
        for j in range(i + 1, len(sets)):
            if labels[i] & labels[j]:
                raise ValueError("candidate sets share a circuit")
    budget = default_phase_budget(world.n) if phases is None else phases
    alive = [list(range(len(s))) for s in sets]
    single_at = [0 if len(s) == 1 else -1 for s in sets]
    start = world.round
    total = graph.labels.shape[0]
    for phase in range(1, budget + 1):
        if all(len(a) == 1 for a in alive):
            world.idle_rounds(budget - phase + 1, tag=f"{tag}:settled")
            break
        beeps = np.zeros(total, dtype=bool)
        draws = []
        for si, s in enumerate(sets):
            row = []
            for c in alive[si]:
                heads = world.rng(s[c] // graph.nsets).getrandbits(1) == 1
                row.append(heads)
                if heads:
                    beeps[s[c]] = True
            draws.append(row)
        rec = world.beep_round(graph, beeps.reshape(graph.n, graph.nsets), tag=f"{tag}:phase").reshape(-1)
        for si, s in enumerate(sets):
            alive[si] = [c for c, h in zip(alive[si], draws[si]) if h or not rec[s[c]]]
            if len(alive[si]) == 1 and single_at[si] < 0:
                single_at[si] = phase
    completed = all(len(a) == 1 for a in alive)
    return LeaderResult(leaders=[a[0] if len(a) == 1 else None for a in alive],
                        survivors=alive, phases=single_at, completed=completed,
                        rounds=world.round - start)


def elect_until_unique(world: AmoebotWorld, candidate_sets, graph=None, tag: str = "elect") -> LeaderResult:
    """Repeat budgeted elections on the survivors until every set has one leader.

    The repetition is decided by the simulator, which can see the survivor
    count; it is needed with probability at most about ``1/n``.
    """
    sets = [list(s) for s in candidate_sets]
    idx = [list(range(len(s))) for s in sets]
    rounds = 0
    while True:
        res = leader_election(world, [[s[i] for i in ix] for s, ix in zip(sets, idx)], graph, tag=tag)
        rounds += res.rounds
        idx = [[ix[c] for c in alive] for ix, alive in zip(idx, res.survivors)]
        if res.completed:
            break
        tag = tag.split(":retry")[0] + ":retry"
    res.survivors = idx
    res.leaders = [ix[0] for ix in idx]
    res.rounds = rounds
    return res


# ------------------------------------------------------------ synchronization


@dataclass
class SyncReport:
    finished_at: list[int]  # round after which each procedure reported completion
    rounds: int


def synchronize(world: AmoebotWorld, procedures: Sequence[Iterator], max_rounds: int | None = None,
                tag: str = "sync") -> SyncReport:
    """Interleave work steps with global-circuit checks until a check is silent.

    Each procedure is an iterator whose ``next()`` performs one step (charging
    its own rounds); exhaustion means it is done.  After every step, amoebots
    of unfinished procedures beep on the global circuit.
    """
    procs = list(procedures)
    done = [False] * len(procs)
    finished_at = [-1] * len(procs)
    start = world.round
    graph = world.global_circuit()
    while True:
        for i, p in enumerate(procs):
            if done[i]:
                continue
            try:
                next(p)
            except StopIteration:
                done[i] = True
                finished_at[i] = world.round
        beeps = np.zeros((world.n, 1), dtype=bool)
        if not all(done):
            beeps[0, 0] = True  # any member of an unfinished subset
        rec = world.beep_round(graph, beeps, tag=f"{tag}:check")
        if not rec.any():
            break
        if max_rounds is not None and world.round - start >= max_rounds:
            raise RoundBudgetExhausted(f"procedures unfinished after {max_rounds} rounds")
    return SyncReport(finished_at, world.round - start)


# --------------------------------------------------------- sum modulo k


@dataclass
class ChainSum:
    value: int
    rounds: int
    iterations: int


def chain_sums(world: AmoebotWorld, chains: Sequence[ChainRef], values: Sequence[Sequence[int]], k: int,
               closed_lanes: bool = False, tag: str = "chainsum") -> list[ChainSum]:
    """Sums mod ``k`` on several chains at once (disjoint lanes, shared rounds).

    Position ``i`` simulates ``values[i]`` consecutive virtual chain elements
    (one partition-set pair each, merged internally); PASC from a virtual
    reference in front of position 0 hands the last element the identifier
    ``sum(values)``, read LSB first and reduced mod ``k`` on the fly.  The
    residue is then broadcast bit by bit on the chain circuit.
    ``closed_lanes`` reserves the lanes of the closing link of cyclic chains.
    """
    if k < 1:
        raise ValueError("k must be positive")
    for ch, vals in zip(chains, values):
        if len(vals) != len(ch):
            raise ValueError("one value per chain position")
        if any(not 0 <= x < k for x in vals):
            raise ValueError("values must lie in 0..k-1")
    start = world.round
    amo, loc, stp, inst, links = [], [], [], [], []
    used: dict[int, int] = {}

    def add_node(a: int, s: int, c: int) -> int:
        amo.append(a)
        loc.append(used.get(a, 0))
        used[a] = used.get(a, 0) + 1
        stp.append(s)
        inst.append(c)
        return len(amo) - 1

    pairs, owners = [], []
    for ci, ch in enumerate(chains):
        for j, pr in enumerate(chain_links(ch, closed_lanes)):
            pairs.append(pr)
            owners.append((ci, j))
    bases = dict(zip(owners, link_bases(pairs)))
    refs, terminals = [], []
    for ci, (ch, vals) in enumerate(zip(chains, values)):
        s = 0
        ref = add_node(world.index[ch.positions[0]], 0, ci)
        refs.append(ref)
        prev = ref
        for i, p in enumerate(ch.positions):
            a = world.index[p]
            nodes = []
            for _ in range(max(vals[i], 1)):
                if vals[i] > 0:
                    s += 1
                nodes.append(add_node(a, s, ci))
            if i == 0:
                links.append((prev, nodes[0], -1, 0))
            else:
                e = direction_between(ch.positions[i - 1], p).dir6
                links.append((prev, nodes[0], e, bases[(ci, i - 1)]))
            for x, y in zip(nodes, nodes[1:]):
                links.append((x, y, -1, 0))
            prev = nodes[-1]
        terminals.append(prev)
    sub = Substrate(amoebot=np.array(amo, dtype=np.int64), local=np.array(loc, dtype=np.int64),
                    stripe=np.array(stp, dtype=np.int64), instance=np.array(inst, dtype=np.int64),
                    links=np.array(links, dtype=np.int64).reshape(-1, 4),
                    pins_needed=max(bases.values(), default=0) + 2)
    run = run_pasc(world, sub, refs, tag=tag)
    results = []
    for ci, t in enumerate(terminals):
        bits = run.node_bits(t)
        # constant-memory reduction at the terminal amoebot
        acc, weight = 0, 1 % k
        for i, b in enumerate(bits):
            acc = (acc - b * weight if i == len(bits) - 1 else acc + b * weight) % k
            weight = (2 * weight) % k
        results.append(acc)
    circ = chain_circuit(world, chains, closed=closed_lanes)
    for j in range(max(1, ceil_log2(k))):
        beeps = np.zeros(circ.graph.labels.shape[0], dtype=bool)
        for ci, acc in enumerate(results):
            if (acc >> j) & 1:
                beeps[circ.sets[ci][-1]] = True
        world.beep_round(circ.graph, beeps.reshape(circ.graph.n, circ.graph.nsets), tag=f"{tag}:broadcast")
    rounds = world.round - start
    return [ChainSum(value=acc, rounds=rounds, iterations=int(run.iterations[ci]))
            for ci, acc in enumerate(results)]


def chain_sum_mod_k(world: AmoebotWorld, chain: ChainRef, values: Sequence[int], k: int) -> ChainSum:
    """Every chain member learns ``sum(values) mod k`` in O(log m) rounds."""
    return chain_sums(world, [chain], [values], k)[0]


# ------------------------------------------------------------- boundaries


@dataclass(frozen=True)
class Occurrence:
    """A local boundary of ``node``: a maximal cyclic run of empty neighbors.

    The run covers ``dir6`` values ``start .. start+length-1`` counterclockwise;
    the cycle enters from the neighbor just before the run and leaves to the
    neighbor just after it, so the empty region lies on the right.
    """

    node: GridCoord
    start: int
    length: int

    @property
    def isolated(self) -> bool:
        return self.length == 6

    @property
    def empty_dirs(self) -> list[int]:
        return [(self.start + i) % 6 for i in range(self.length)]

    @property
    def pred_dir(self) -> int | None:
        return None if self.isolated else (self.start - 1) % 6

    @property
    def succ_dir(self) -> int | None:
        return None if self.isolated else (self.start + self.length) % 6

    def _step(self, e):
        dq, dr = OFFSETS6[e]
        return GridCoord(self.node[0] + dq, self.node[1] + dr)

    @property
    def pred(self) -> GridCoord | None:
        return None if self.isolated else self._step(self.pred_dir)

    @property
    def succ(self) -> GridCoord | None:
        return None if self.isolated else self._step(self.succ_dir)

    @property
    def turn(self) -> int:
        """Left turn in 60-degree units when passing this occurrence."""
        return 6 if self.isolated else self.length - 2

    def empty_nodes(self) -> list[GridCoord]:
        return [self._step(e) for e in self.empty_dirs]


def local_boundaries(world: AmoebotWorld, v) -> list[Occurrence]:
    v = GridCoord(*v)
    i = world.index[v]
    occ = [world.nbr[i, e] >= 0 for e in range(6)]
    if not any(occ):
        return [Occurrence(v, 0, 6)]
    out = []
    for e in range(6):
        if not occ[e] and occ[(e - 1) % 6]:
            length = 0
            while not occ[(e + length) % 6]:
                length += 1
            out.append(Occurrence(v, e, length))
    return out


@dataclass
class BoundarySet:
    cycle: list[Occurrence]
    kind: str | None = None  # "inner" | "outer"
    region_id: GridCoord | None = None
    residue: int | None = None
    rounds: int = 0

    @property
    def chain(self) -> ChainRef:
        return ChainRef([o.node for o in self.cycle], 0)

    @property
    def members(self) -> set[GridCoord]:
        return {o.node for o in self.cycle}


def next_occurrence(table: dict, o: Occurrence) -> Occurrence:
    """Successor occurrence: the one at ``o.succ`` sharing ``o``'s last empty node."""
    if o.isolated:
        return o
    shared = o._step((o.start + o.length - 1) % 6)
    e = direction_between(o.succ, shared).dir6
    return table[(o.succ, e)]


def occurrence_table(world: AmoebotWorld) -> dict:
    table = {}
    for v in world.coords:
        for o in local_boundaries(world, v):
            for e in o.empty_dirs:
                table[(v, e)] = o
    return table


def trace_cycles(world: AmoebotWorld) -> list[list[Occurrence]]:
    table = occurrence_table(world)
    seen: set = set()
    cycles = []
    for o in sorted(set(table.values()), key=lambda o: (o.node, o.start)):
        if o in seen:
            continue
        cyc = [o]
        seen.add(o)
        x = next_occurrence(table, o)
        while x != o:
            cyc.append(x)
            seen.add(x)
            x = next_occurrence(table, x)
        cycles.append(cyc)
    return cycles


def classify_boundaries(world: AmoebotWorld, bs: Sequence[BoundarySet]) -> list[str]:
    """Inner/outer for all cycles in parallel.

    Each cycle elects a leader on its own circuit, is cut open there, and sums
    its turns (60-degree units) mod 5: +6 leaves residue 1 (outer), -6
    residue 4 (inner).
    """
    if not bs:
        return []
    start = world.round
    chains = [b.chain for b in bs]
    circ = chain_circuit(world, chains, closed=True)
    res = elect_until_unique(world, circ.sets, circ.graph, tag="boundary:elect")
    cut = []
    for b, lead in zip(bs, res.leaders):
        cut.append(b.cycle[lead:] + b.cycle[:lead])
    sums = chain_sums(world, [ChainRef([o.node for o in c], 0) for c in cut],
                      [[o.turn % 5 for o in c] for c in cut], 5, closed_lanes=True, tag="boundary:turns")
    for b, s in zip(bs, sums):
        b.residue = s.value
        b.kind = "outer" if s.value == 1 else "inner"
        b.rounds = world.round - start
    return [b.kind for b in bs]


def classify_boundary(world: AmoebotWorld, b: BoundarySet) -> str:
    return classify_boundaries(world, [b])[0]


def detect_boundaries(world: AmoebotWorld, classify: bool = True) -> list[BoundarySet]:
    """Boundary cycles from purely local information, optionally classified."""
    out = []
    for cyc in trace_cycles(world):
        region = min(x for o in cyc for x in o.empty_nodes())
        out.append(BoundarySet(cycle=cyc, region_id=region))
    if classify:
        classify_boundaries(world, out)
    return out
