"""Synchronous round machine for the reconfigurable circuit extension.

Pins are labeled ``(dir6, slot)``: ``dir6`` is the grid edge toward the
neighbor (0..5, counterclockwise from N) and ``slot`` is in ``0..k-1``.  Both
endpoints of a bond use the same slot numbers, so pin ``(e, j)`` of ``u`` and
pin ``(e+3, j)`` of its neighbor form one external link.

A round-level pin configuration is a dense integer array ``psid`` of shape
``(n, 6, k)`` mapping every pin to a local partition-set index (``-1`` leaves
the pin in an implicit singleton set).  Partition set ``l`` of amoebot ``u``
has the global id ``u * nsets + l``.  Circuits are the connected components of
the partition-set graph; their label is the smallest member id.
"""

from __future__ import annotations

import functools
import json
import logging
import pickle
import random
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Protocol, Sequence

import numpy as np
from numba import njit

from .grid import GridCoord, OFFSETS6, is_connected

log = logging.getLogger(__name__)


class EngineError(Exception):
    pass


class DisconnectedStructure(EngineError):
    pass


class DuplicateNode(EngineError):
    pass


class InvalidPinCount(EngineError):
    pass


class StateBudgetExceeded(EngineError):
    pass


class RoundBudgetExhausted(EngineError):
    pass


class InvalidPinConfiguration(EngineError):
    pass


# ---------------------------------------------------------------- kernels


@njit(cache=True)
def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


@njit(cache=True)
def _union(parent, a, b):
    ra = _find(parent, a)
    rb = _find(parent, b)
    if ra == rb:
        return
    # smaller id becomes the root so labels are canonical
    if ra < rb:
        parent[rb] = ra
    else:
        parent[ra] = rb


@njit(cache=True)
def _component_labels(nbr, psid, nsets, merges):
    n = nbr.shape[0]
    k = psid.shape[2]
    total = n * nsets
    parent = np.arange(total)
    for u in range(n):
        for e in range(6):
            v = nbr[u, e]
            if v <= u:
                continue
            oe = (e + 3) % 6
            for j in range(k):
                a = psid[u, e, j]
                b = psid[v, oe, j]
                if a >= 0 and b >= 0:
                    _union(parent, u * nsets + a, v * nsets + b)
    for i in range(merges.shape[0]):
        _union(parent, merges[i, 0], merges[i, 1])
    for x in range(total):
        parent[x] = _find(parent, x)
    return parent


_NO_MERGES = np.zeros((0, 2), dtype=np.int64)


@dataclass
class CircuitGraph:
    """Connected components of all partition sets of one round."""

    labels: np.ndarray  # flat, length n * nsets; label = min member id
    nsets: int
    n: int

    def component_of(self, u: int, local: int) -> int:
        return int(self.labels[u * self.nsets + local])

    def deliver(self, beeps: np.ndarray) -> np.ndarray:
        """Received flags for every partition set, given who beeped."""
        flat = np.asarray(beeps, dtype=bool).reshape(-1)
        hit = np.zeros(self.labels.shape[0], dtype=bool)
        hit[self.labels[flat]] = True
        return hit[self.labels].reshape(self.n, self.nsets)

    def beeped_components(self, beeps: np.ndarray) -> list[int]:
        flat = np.asarray(beeps, dtype=bool).reshape(-1)
        return sorted(set(self.labels[flat].tolist()))

    def count(self, used: np.ndarray | None = None) -> int:
        if used is None:
            return int(np.unique(self.labels).shape[0])
        return int(np.unique(self.labels[np.asarray(used, bool).reshape(-1)]).shape[0])


def compute_circuits(nbr: np.ndarray, psid: np.ndarray, nsets: int | None = None,
                     merges: np.ndarray | None = None) -> CircuitGraph:
    if nsets is None:
        nsets = max(int(psid.max()) + 1, 1)
    if merges is None:
        merges = _NO_MERGES
    labels = _component_labels(nbr, psid.astype(np.int64, copy=False), nsets,
                               np.asarray(merges, dtype=np.int64).reshape(-1, 2))
    return CircuitGraph(labels=labels, nsets=nsets, n=nbr.shape[0])


# ---------------------------------------------------------------- programs


@dataclass
class AmoebotView:
    """What an amoebot can see locally: its occupied neighbor directions and pins."""

    index: int
    coord: GridCoord
    occupied: tuple[bool, ...]  # per dir6
    pins_per_edge: int
    rng: random.Random

    @property
    def pins(self) -> list[tuple[int, int]]:
        return [(e, j) for e in range(6) if self.occupied[e] for j in range(self.pins_per_edge)]


@dataclass
class ActivationResult:
    next_state: Any
    partition_sets: list[frozenset]
    beep_on: set[int] = field(default_factory=set)


class Program(Protocol):
    def initial_state(self, view: AmoebotView) -> Any: ...

    def activate(self, view: AmoebotView, state: Any, received: tuple[bool, ...]) -> ActivationResult: ...


@dataclass
class RoundReport:
    round: int
    tag: str | None
    beeped: list[int]
    components: int | None = None


# ---------------------------------------------------------------- world


def _zigzag(x: int) -> int:
    return 2 * x if x >= 0 else -2 * x - 1


class AmoebotWorld:
    """A static amoebot structure plus round counter, randomness and trace."""

    def __init__(self, coords: Sequence, pins_per_edge: int = 2, seed: int = 0,
                 state_budget: int | None = None, check_connected: bool = True):
        if pins_per_edge < 1:
            raise InvalidPinCount(f"pins per edge must be >= 1, got {pins_per_edge}")
        cs = [GridCoord(int(c[0]), int(c[1])) for c in coords]
        if not cs:
            raise ValueError("structure is empty")
        if len(set(cs)) != len(cs):
            dup = next(c for c in cs if cs.count(c) > 1)
            raise DuplicateNode(f"node {tuple(dup)} listed twice")
        if check_connected and not is_connected(cs):
            raise DisconnectedStructure("structure is not connected")
        self.coords: list[GridCoord] = sorted(cs)
        self.index = {c: i for i, c in enumerate(self.coords)}
        self.n = len(self.coords)
        self.pins_per_edge = pins_per_edge
        self.seed = int(seed)
        self.state_budget = state_budget
        self.round = 0
        self.trace: list[dict] | None = []
        self._rngs: dict[int, random.Random] = {}
        nbr = np.full((self.n, 6), -1, dtype=np.int64)
        for i, (q, r) in enumerate(self.coords):
            for e, (dq, dr) in enumerate(OFFSETS6):
                j = self.index.get((q + dq, r + dr))
                if j is not None:
                    nbr[i, e] = j
        self.nbr = nbr
        self.programs: list[Program] | None = None
        self._states: list[Any] = []
        self._received: list[tuple[bool, ...]] = []

    @classmethod
    def tiled(cls, base: "AmoebotWorld", copies: int, width: int) -> "AmoebotWorld":
        """``copies`` translates of ``base``, copy ``j`` shifted by ``j * width`` along q.

        ``width`` must exceed the q-extent of ``base`` so that copies share no
        bonds; amoebot ``j * base.n + i`` is amoebot ``i`` of copy ``j``.
        """
        xy = np.array(base.coords, dtype=np.int64).reshape(-1, 2)
        if width <= int(xy[:, 0].max() - xy[:, 0].min()) + 1:
            raise ValueError("copies would touch")
        shift = np.repeat(np.arange(copies, dtype=np.int64), base.n)
        all_xy = np.tile(xy, (copies, 1))
        all_xy[:, 0] += shift * width
        nbr = np.tile(base.nbr, (copies, 1))
        nbr = np.where(nbr >= 0, nbr + (shift * base.n)[:, None], -1)
        w = _TiledWorld.__new__(_TiledWorld)
        w.pins_per_edge, w.seed, w.state_budget = base.pins_per_edge, base.seed, base.state_budget
        w.n = all_xy.shape[0]
        w.round = 0
        w.trace = []
        w._rngs = {}
        w.nbr = nbr
        w._coord_array = all_xy
        w.programs = None
        w._states, w._received = [], []
        return w

    # -- basics

    @property
    def bonds(self) -> int:
        return int((self.nbr >= 0).sum()) // 2

    def occupied(self, v) -> bool:
        return (v[0], v[1]) in self.index

    def rng(self, i: int) -> random.Random:
        """Per-amoebot random stream derived from (seed, coordinate)."""
        g = self._rngs.get(i)
        if g is None:
            q, r = self.coords[i]
            ss = np.random.SeedSequence([self.seed & (2 ** 64 - 1), _zigzag(q), _zigzag(r)])
            g = random.Random(int(ss.generate_state(2, dtype=np.uint64)[0]))
            self._rngs[i] = g
        return g

    def new_psid(self, nsets_dtype=np.int64) -> np.ndarray:
        return np.full((self.n, 6, self.pins_per_edge), -1, dtype=nsets_dtype)

    def require_pins(self, needed: int, what: str):
        if self.pins_per_edge < needed:
            raise InvalidPinCount(f"{what} needs {needed} pins per edge, world has {self.pins_per_edge}")

    # -- round-level interface used by the algorithms

    def circuits(self, psid: np.ndarray, nsets: int | None = None,
                 merges: np.ndarray | None = None) -> CircuitGraph:
        return compute_circuits(self.nbr, psid, nsets, merges)

    def beep_round(self, graph: CircuitGraph, beeps: np.ndarray, tag: str | None = None) -> np.ndarray:
        """One synchronous round on an established configuration.

        Returns the per-partition-set received flags that amoebots observe at
        the start of the next round.
        """
        received = graph.deliver(beeps)
        self.round += 1
        if self.trace is not None:
            self.trace.append({"round": self.round, "tag": tag,
                               "beeped": graph.beeped_components(beeps)})
        return received

    def idle_rounds(self, count: int, tag: str | None = None):
        """Rounds whose content is accounted for but not simulated pin by pin.

        A stretch of idle rounds is traced as one record ending at the last
        of them, with ``idle`` holding its length.
        """
        if count <= 0:
            return
        self.round += count
        if self.trace is not None:
            self.trace.append({"round": self.round, "tag": tag, "beeped": [], "idle": count})

    def global_circuit(self) -> CircuitGraph:
        psid = np.zeros((self.n, 6, self.pins_per_edge), dtype=np.int64)
        return self.circuits(psid, 1)

    def write_trace(self, path_or_file):
        lines = "".join(json.dumps(rec, sort_keys=True) + "\n" for rec in (self.trace or []))
        if hasattr(path_or_file, "write"):
            path_or_file.write(lines)
        else:
            with open(path_or_file, "w") as fh:
                fh.write(lines)

    # -- program interface

    def view(self, i: int) -> AmoebotView:
        return AmoebotView(i, self.coords[i], tuple(bool(x >= 0) for x in self.nbr[i]),
                           self.pins_per_edge, self.rng(i))

    def install(self, programs: Program | Sequence[Program]):
        if not isinstance(programs, (list, tuple)):
            programs = [programs] * self.n
        if len(programs) != self.n:
            raise ValueError("need one program per amoebot")
        self.programs = list(programs)
        self._states = [p.initial_state(self.view(i)) for i, p in enumerate(self.programs)]
        self._received = [() for _ in range(self.n)]

    @property
    def states(self) -> list[Any]:
        return self._states

    def _check_budget(self, i: int, state: Any):
        if self.state_budget is not None:
            size = len(pickle.dumps(state))
            if size > self.state_budget:
                raise StateBudgetExceeded(
                    f"amoebot {tuple(self.coords[i])} state is {size} bytes (budget {self.state_budget})")

    def _normalize(self, i: int, sets: Iterable[Iterable]) -> list[frozenset]:
        live = {(e, j) for e in range(6) if self.nbr[i, e] >= 0 for j in range(self.pins_per_edge)}
        out: list[frozenset] = []
        seen: set = set()
        for s in sets:
            fs = frozenset((int(e), int(j)) for e, j in s)
            if fs & seen:
                raise InvalidPinConfiguration(f"partition sets of {tuple(self.coords[i])} overlap")
            if not fs <= live:
                raise InvalidPinConfiguration(f"{tuple(self.coords[i])} uses pins it does not have")
            seen |= fs
            out.append(fs)
        return out

    def step(self) -> RoundReport:
        """Activate every program once on the previous round's snapshot."""
        if self.programs is None:
            raise EngineError("no programs installed")
        results = []
        for i, prog in enumerate(self.programs):
            res = prog.activate(self.view(i), self._states[i], self._received[i])
            self._check_budget(i, res.next_state)
            sets = self._normalize(i, res.partition_sets)
            if any(b < 0 or b >= len(sets) for b in res.beep_on):
                raise InvalidPinConfiguration("beep on a partition set that does not exist")
            results.append((res, sets))
        nsets = max(1, max(len(s) for _, s in results))
        psid = self.new_psid()
        beeps = np.zeros((self.n, nsets), dtype=bool)
        for i, (res, sets) in enumerate(results):
            for l, s in enumerate(sets):
                for e, j in s:
                    psid[i, e, j] = l
            for b in res.beep_on:
                beeps[i, b] = True
        graph = self.circuits(psid, nsets)
        received = self.beep_round(graph, beeps)
        for i, (res, sets) in enumerate(results):
            self._states[i] = res.next_state
            self._received[i] = tuple(bool(x) for x in received[i, : len(sets)])
        used = np.zeros((self.n, nsets), dtype=bool)
        for i, (_, sets) in enumerate(results):
            used[i, : len(sets)] = True
        return RoundReport(self.round, None, graph.beeped_components(beeps), graph.count(used))


class _TiledWorld(AmoebotWorld):
    """Tiled world whose coordinate list and index are built on first use."""

    @functools.cached_property
    def coords(self) -> list[GridCoord]:
        return list(map(GridCoord._make, self._coord_array.tolist()))

    @functools.cached_property
    def index(self) -> dict[GridCoord, int]:
        return dict(zip(self.coords, range(self.n)))


def load_structure(coords: Sequence, k: int = 2, seed: int = 0, **kw) -> AmoebotWorld:
    if not coords:
        raise ValueError("structure is empty")
    return AmoebotWorld(coords, pins_per_edge=k, seed=seed, **kw)


def step(world: AmoebotWorld) -> RoundReport:
    return world.step()


def run_until(world: AmoebotWorld, predicate: Callable[[AmoebotWorld], bool],
              max_rounds: int) -> list[RoundReport]:
    if max_rounds <= 0:
        raise ValueError("max_rounds must be positive")
    reports: list[RoundReport] = []
    while not predicate(world):
        if len(reports) >= max_rounds:
            raise RoundBudgetExhausted(f"predicate still false after {max_rounds} rounds")
        reports.append(world.step())
    return reports
