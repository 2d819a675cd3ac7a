"""Symmetry detection by comparing encoded canonical skeleton paths.

Every occurrence of a skeleton path stores a 3-bit code: the direction of
its successor counted in 60 degree steps from ``d_p``, counterclockwise for
``s = +1`` and clockwise for ``s = -1``.  Rotating the structure rotates the
construction and mirroring it flips the sign, so symmetric structures give
identical code strings.

Two strings held by chains ``A`` and ``B`` are compared by

1. comparing the lengths through the PASC identifiers of the last elements;
2. comparing directly when ``m < ETA``;
3. otherwise splitting ``A`` and ``B`` into blocks of ``k`` elements with the
   block primitive, comparing the incomplete last block directly and running
   ``c * ceil(log m)`` rounds of polynomial identity testing over a random
   prime ``p`` with ``2m <= p < 4m``.

Block arithmetic (trial division, modular multiplication and exponentiation,
block sums) is evaluated by the bit-level algorithms below and charged with
fixed round costs; each ``l``-bit addition, comparison or subtraction costs
``l`` rounds.  Values travel between the chains bit by bit over the global
circuit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from numba import njit
import numpy as np

from .engine import AmoebotWorld, CircuitGraph
from .grid import Direction, direction_between, neighbor, opposite
from .pasc import ChainRef, block_primitive, ceil_log2, mark_position, pasc_run
from .skeleton import canonical_skeleton, principal_direction

ETA = 44
CODE_BITS = 3
ISOLATED_CODE = 6  # a lone amoebot has no successor


class PrimeGenerationExhausted(RuntimeError):
    pass


# ------------------------------------------------------------- encoding


@dataclass
class EncodedPath:
    chain: ChainRef
    codes: list[int]
    d: Direction
    s: int

    @property
    def bits(self) -> list[int]:
        """LSB-first code bits, ``CODE_BITS`` per occurrence."""
        return [(c >> j) & 1 for c in self.codes for j in range(CODE_BITS)]

    def __len__(self):
        return len(self.codes)


def successor_code(node, succ, d: Direction, s: int) -> int:
    if succ is None:
        return ISOLATED_CODE
    dp = principal_direction(d, s)
    return (s * (direction_between(node, succ).dir6 - dp.dir6)) % 6


def encode_skeleton_path(cycle: Sequence[tuple], d: Direction, s: int = 1) -> EncodedPath:
    """Codes for a skeleton given as ``(node, pred, succ)`` occurrences."""
    d = Direction(d)
    codes = [successor_code(v, succ, d, s) for v, _, succ in cycle]
    return EncodedPath(chain=ChainRef([o[0] for o in cycle], 0), codes=codes, d=d, s=s)


def decode_path(codes: Sequence[int], d: Direction, s: int, start) -> list:
    """Node sequence spelled by ``codes`` when the first node is ``start``."""
    dp = principal_direction(Direction(d), s)
    out = [start]
    for c in codes[:-1]:
        out.append(neighbor(out[-1], Direction.from_dir6(dp.dir6 + s * c)))
    return out


# ----------------------------------------------------------- arithmetic


@njit(cache=True)
def _mulmod(a, b, p, nbits):
    """Interleaved shift-and-add: MSB first, reduce after every doubling and addition."""
    acc = 0
    for j in range(nbits - 1, -1, -1):
        acc <<= 1
        if acc >= p:
            acc -= p
        if (b >> j) & 1:
            acc += a
            if acc >= p:
                acc -= p
    return acc


@njit(cache=True)
def _reduce(x, p, nbits):
    """Remainder by binary long division of an ``nbits``-bit ``x``."""
    rem = 0
    for j in range(nbits - 1, -1, -1):
        rem = (rem << 1) | ((x >> j) & 1)
        if rem >= p:
            rem -= p
    return rem


@njit(cache=True)
def _modexp(r, e, p, nbits, ebits):
    """Right-to-left binary exponentiation."""
    result = 1 % p
    base = r
    for j in range(ebits):
        if (e >> j) & 1:
            result = _mulmod(result, base, p, nbits)
        base = _mulmod(base, base, p, nbits)
    return result


@njit(cache=True)
def _poly_terms(coeffs, p, r, nbits, ebits):
    out = np.empty(coeffs.shape[0], dtype=np.int64)
    for e in range(coeffs.shape[0]):
        a = _reduce(coeffs[e], p, nbits + CODE_BITS)
        out[e] = _mulmod(a, _modexp(r, e, p, nbits, ebits), p, nbits)
    return out


@njit(cache=True)
def _first_divisor_step(p, lo, hi, k, nbits):
    """Lockstep trial division: block ``i`` tests ``t = lo_i + j`` at step ``j``.

    Returns the first step at which some block finds a divisor, else ``-1``.
    """
    for j in range(k):
        for i in range(lo.shape[0]):
            t = lo[i] + j
            if t >= 2 and t < hi[i] and _reduce(p, t, nbits) == 0:
                return j
    return -1


def op_rounds(l: int) -> int:
    return l


def mulmod_rounds(l: int) -> int:
    return l * 3 * op_rounds(l)


def modexp_rounds(l: int, ebits: int) -> int:
    return ebits * 2 * mulmod_rounds(l)


def division_rounds(l: int) -> int:
    return l * op_rounds(l)


def block_sum_rounds(l: int, blocks: int) -> int:
    """Tournament of modular additions; each level moves a value and adds it (add + reduce)."""
    return ceil_log2(max(blocks, 1)) * 3 * op_rounds(l)


@dataclass
class PolyEval:
    value: int
    rounds: int


def add_mod(x: int, y: int, p: int) -> int:
    z = x + y
    return z - p if z >= p else z


def evaluate_polynomial(coeffs: Sequence[int], p: int, r: int, block: int | None = None) -> PolyEval:
    """``sum a_i r^i mod p`` computed block-parallel.

    Every block of ``block`` coefficients evaluates its terms one exponent at
    a time (right-to-left exponentiation, then one modular multiplication by
    ``a_e``); after each step the block terms are summed by a tournament and
    added to the running total.
    """
    m = len(coeffs)
    if p < 2:
        raise ValueError("modulus must be at least 2")
    if m == 0:
        return PolyEval(0, 0)
    k = m if block is None else block
    nb = -(-m // k)
    l = p.bit_length()
    ebits = max(1, (m - 1).bit_length())
    a = np.asarray(coeffs, dtype=np.int64)
    if a.min() < 0 or a.max() >= 1 << (l + CODE_BITS):
        raise ValueError("coefficients out of range")
    terms = _poly_terms(a, p, r % p, l, ebits)
    total = 0
    for j in range(k):
        step = 0
        for i in range(nb):
            e = i * k + j
            if e < m:
                step = add_mod(step, int(terms[e]), p)
        total = add_mod(total, step, p)
    per_step = modexp_rounds(l, ebits) + mulmod_rounds(l) + block_sum_rounds(l, nb) + 2 * op_rounds(l) + 1
    return PolyEval(value=total, rounds=k * per_step)


# -------------------------------------------------------- string equality


def _global(world: AmoebotWorld) -> CircuitGraph:
    g = getattr(world, "_global_graph", None)
    if g is None:
        g = world._global_graph = world.global_circuit()
    return g


def send_value(world: AmoebotWorld, sender: int, value: int, nbits: int, tag: str) -> int:
    """Beep ``value`` LSB first on the global circuit; returns what the listeners decode."""
    graph = _global(world)
    out = 0
    for j in range(nbits):
        beeps = np.zeros((world.n, 1), dtype=bool)
        if (value >> j) & 1:
            beeps[sender, 0] = True
        rec = world.beep_round(graph, beeps, tag=tag)
        out |= int(rec[0, 0]) << j
    return out


def _compare_direct(world: AmoebotWorld, a: Sequence[int], b: Sequence[int], tag: str) -> bool:
    """Pairwise code comparison, one element pair after the other over the global circuit."""
    equal = True
    for x, y in zip(a, b):
        got = send_value(world, 0, x, CODE_BITS, tag)
        if got != y:
            equal = False
        world.beep_round(_global(world), np.array([[not equal]] + [[False]] * (world.n - 1)), tag=tag)
        if not equal:
            break
    return equal


@dataclass
class EqualityPlan:
    """The deterministic part of a comparison: lengths, blocks and the direct tail check."""

    m: int
    m_other: int
    decided: bool | None  # answer when no sampling is needed
    l: int = 0
    k: int = 0
    prefix: int = 0  # coefficients covered by complete blocks
    rounds: int = 0


@dataclass
class EqualityResult:
    equal: bool
    stage: str  # "length", "direct", "tail" or "pit"
    repetitions: int
    prime: int | None
    primes_tried: int
    rounds: int
    plan: EqualityPlan = field(repr=False, default=None)


def equality_parameters(m: int) -> tuple[int, int, int]:
    l = ceil_log2(m) + 2
    lam = 2 * l
    return l, lam, 1 << ceil_log2(lam)


def plan_equality(world: AmoebotWorld, A: EncodedPath, B: EncodedPath) -> EqualityPlan:
    start = world.round
    ia = pasc_run(world, A.chain)
    ib = pasc_run(world, B.chain)
    ta, tb = ia.bits[-1], ib.bits[-1]
    width = max(len(ta), len(tb))
    same = True
    for j in range(width):
        x = ta[j] if j < len(ta) else 0
        y = tb[j] if j < len(tb) else 0
        if send_value(world, 0, x, 1, "equality:length") != y:
            same = False
    m, m2 = len(A), len(B)
    if not same:
        return EqualityPlan(m, m2, False, rounds=world.round - start)
    if m < ETA:
        eq = _compare_direct(world, A.codes, B.codes, "equality:direct")
        return EqualityPlan(m, m2, eq, rounds=world.round - start)
    l, lam, k = equality_parameters(m)
    for chain in (A.chain, B.chain):
        if mark_position(world, chain, lam) != lam:
            raise AssertionError("marker did not reach A_lambda")
    ba = block_primitive(world, A.chain, lam)
    bb = block_primitive(world, B.chain, lam)
    if ba.block != k or bb.block != k:
        raise AssertionError("block primitive disagrees with 2**ceil(log lambda)")
    last = ba.marks[-1]
    if not _compare_direct(world, A.codes[last:], B.codes[last:], "equality:tail"):
        return EqualityPlan(m, m2, False, l=l, k=k, prefix=last, rounds=world.round - start)
    return EqualityPlan(m, m2, None, l=l, k=k, prefix=last, rounds=world.round - start)


def generate_prime(world: AmoebotWorld, A: EncodedPath, plan: EqualityPlan, c: int) -> tuple[int, int]:
    """Sample ``l``-bit candidates with the top bit set until trial division finds no divisor.

    Returns ``(p, attempts)``.
    """
    l, k, m = plan.l, plan.k, plan.m
    holders = [world.index[v] for v in A.chain.positions[:l]]
    nb = -(-m // k)
    lo = np.arange(nb, dtype=np.int64) * k
    hi = np.full(nb, m, dtype=np.int64)
    budget = 3 * c * l * l
    for attempt in range(1, budget + 1):
        p = 1 << (l - 1)
        for i in range(l - 1):
            p |= world.rng(holders[i]).getrandbits(1) << i
        world.idle_rounds(1, tag="prime:sample")
        step = _first_divisor_step(p, lo, hi, k, l)
        steps = k if step < 0 else step + 1
        # every step: a division, an increment of t and one global beep to abort
        world.idle_rounds(steps * (division_rounds(l) + op_rounds(l)), tag="prime:trial")
        world.idle_rounds(steps, tag="prime:abort")
        if step < 0:
            return p, attempt
    raise PrimeGenerationExhausted(f"no prime after {budget} candidates")


def string_equality(world: AmoebotWorld, A: EncodedPath, B: EncodedPath, c: int = 2,
                    plan: EqualityPlan | None = None, repetitions: int | None = None) -> EqualityResult:
    """Equality of the strings on ``A`` and ``B``; equal strings are never reported unequal.

    ``repetitions`` overrides the ``c * ceil(log m)`` evaluations at random points.
    """
    if c < 1:
        raise ValueError("c must be positive")
    start = world.round
    if plan is None:
        plan = plan_equality(world, A, B)
    else:
        world.idle_rounds(plan.rounds, tag="equality:plan")
    if plan.decided is not None:
        stage = "length" if plan.m != plan.m_other else ("direct" if plan.m < ETA else "tail")
        return EqualityResult(plan.decided, stage, 0, None, 0, world.round - start, plan)
    p, tried = generate_prime(world, A, plan, c)
    l, k = plan.l, plan.k
    a0 = world.index[A.chain.positions[0]]
    b0 = world.index[B.chain.positions[0]]
    send_value(world, a0, p, l, "pit:send-p")
    ca, cb = A.codes[:plan.prefix], B.codes[:plan.prefix]
    reps = c * ceil_log2(plan.m) if repetitions is None else repetitions
    for rep in range(1, reps + 1):
        r = world.rng(a0).randrange(p)
        got_r = send_value(world, a0, r, l, "pit:send-r")
        fa = evaluate_polynomial(ca, p, r, k)
        world.idle_rounds(fa.rounds, tag="pit:eval-a")
        fb = evaluate_polynomial(cb, p, got_r, k)
        world.idle_rounds(fb.rounds, tag="pit:eval-b")
        got_fb = send_value(world, b0, fb.value, l, "pit:send-f")
        if got_fb != fa.value:
            return EqualityResult(False, "pit", rep, p, tried, world.round - start, plan)
    return EqualityResult(True, "pit", reps, p, tried, world.round - start, plan)


# ----------------------------------------------------- symmetry detection


AXES = tuple(Direction(i) for i in range(6))  # the other six are the same lines


@dataclass
class SymmetryReport:
    rot2: bool
    rot3: bool
    rot6: bool
    reflections: dict  # Direction -> bool
    rounds: int
    checks: dict = field(default_factory=dict, repr=False)  # name -> EqualityResult

    def to_text(self) -> str:
        lines = [f"rot2 {int(self.rot2)}", f"rot3 {int(self.rot3)}", f"rot6 {int(self.rot6)}"]
        lines += [f"reflect {d.name} {int(self.reflections[d])}" for d in Direction]
        lines.append(f"rounds {self.rounds}")
        return "\n".join(lines) + "\n"


def required_skeletons() -> list[tuple[Direction, int]]:
    keys = [(Direction.N, 1), (Direction.S, 1), (Direction.ESE, 1)]
    for a in AXES:
        for s in (1, -1):
            if (a, s) not in keys:
                keys.append((a, s))
    return keys


def symmetry_paths(world: AmoebotWorld) -> dict:
    """Encoded canonical skeleton paths for every skeleton the checks compare."""
    out = {}
    for d, s in required_skeletons():
        sk = canonical_skeleton(world, d, s)
        out[(d, s)] = encode_skeleton_path(sk.cycle, d, s)
    return out


def symmetry_checks() -> dict:
    checks = {"rot2": ((Direction.N, 1), (Direction.S, 1)), "rot3": ((Direction.N, 1), (Direction.ESE, 1))}
    for a in AXES:
        checks[f"reflect:{a.name}"] = ((a, 1), (a, -1))
    return checks


def detect_symmetries(world: AmoebotWorld, c: int = 2, paths: dict | None = None,
                      plans: dict | None = None) -> SymmetryReport:
    """2-, 3- and 6-fold rotations and the reflections about all twelve axis directions.

    ``paths`` and ``plans`` may carry results of earlier runs on the same
    structure.  Reused plans are charged their rounds again; reused paths are
    not, so ``rounds`` then covers the comparisons only.
    """
    world.require_pins(4, "symmetry detection")
    start = world.round
    if paths is None:
        paths = symmetry_paths(world)
    results = {}
    for name, (ka, kb) in symmetry_checks().items():
        plan = None if plans is None else plans.get(name)
        res = string_equality(world, paths[ka], paths[kb], c, plan=plan)
        if plans is not None:
            plans[name] = res.plan
        results[name] = res
    refl = {}
    for a in AXES:
        refl[a] = refl[opposite(a)] = results[f"reflect:{a.name}"].equal
    rot2, rot3 = results["rot2"].equal, results["rot3"].equal
    return SymmetryReport(rot2=rot2, rot3=rot3, rot6=rot2 and rot3, reflections=refl,
                          rounds=world.round - start, checks=results)
