"""Acceptance criteria.

Every criterion prints one ``PASS``/``FAIL`` line (collected in the terminal
summary) and asserts.  Tolerances are pinned below.  Run alone with
``pytest tests/test_acceptance.py -s``.
"""

import io
import math
import os
import random
import subprocess
import sys
from collections import Counter

import numpy as np
import pytest
import sympy
from conftest import CRITERIA
from scipy import stats

from amoebot.cli import SCENARIOS, ScenarioConfig, run_scenario
from amoebot.engine import AmoebotWorld
from amoebot.grid import Direction, GridCoord, rotate, rotate_coord
from amoebot.oracle import (boundary_amoebots, empty_regions, oracle_first_occurrence_edges, oracle_maxima,
                            oracle_skeleton, oracle_spanning_check, oracle_stripe, oracle_symmetry, reflect_coord)
from amoebot.pasc import ChainRef, ceil_log2, chain_substrate, run_pasc, twos_complement
from amoebot.primitives import default_phase_budget, detect_boundaries, leader_election
from amoebot.shapes import (blob_with_holes, check_structure, format_structure, hex_ring, hexagon, line, random_blob,
                            rotate60, triangle)
from amoebot.skeleton import canonical_skeleton, skeleton_path, spanning_tree
from amoebot.spatial import copies_world, maxima_batch, stripe_batch
from amoebot.svg import render_svg
from amoebot.symmetry import (AXES, ETA, EncodedPath, detect_symmetries, plan_equality, string_equality,
                              symmetry_paths)

pytestmark = pytest.mark.slow

CORPUS_SIZES = (32, 128, 300)
CORPUS_PER_SIZE = 100
CORPUS_HOLE_PROB = 0.05
RESIDUAL_ALPHA = 0.05  # residual slope must not be significant at 95%
PIT_SIGMAS = 3.0


def report(name: str, ok: bool, detail: str) -> None:
    line_ = f"{'PASS' if ok else 'FAIL'} {name}: {detail}"
    print(line_)
    CRITERIA.append(line_)


def corpus(n: int) -> list[list[GridCoord]]:
    return [random_blob(n, 7919 * n + i, hole_prob=CORPUS_HOLE_PROB) for i in range(CORPUS_PER_SIZE)]


# ----------------------------------------------------------------- 1


def test_c1_pasc_exactness():
    wrong_ids, wrong_width, wrong_iters, off_distance, chains = 0, 0, 0, 0, 0
    example = None
    for m in range(1, 257):
        world, group = copies_world(line(m), m)
        world.trace = None
        chains_m = [ChainRef(world.coords[j * m:(j + 1) * m], j) for j in range(m)]
        run = run_pasc(world, chain_substrate(world, chains_m), [j * m + j for j in range(m)])
        for j in range(m):
            nb = int(run.nbits[j])
            vals = [twos_complement(run.bits[j * m + i, :nb].tolist()) for i in range(m)]
            wrong_ids += vals != [i - j for i in range(m)]
            wrong_width += nb > ceil_log2(m) + 1
            off_distance += run.iterations[j] != max(j, m - 1 - j).bit_length()
            if run.iterations[j] != ceil_log2(m):
                wrong_iters += 1
                example = example or (m, j, int(run.iterations[j]))
        chains += m
    report("1 identifiers", wrong_ids == 0 and wrong_width == 0,
           f"{chains} chains (m = 1..256, every r), {wrong_ids} wrong identifiers, "
           f"{wrong_width} wider than ceil(log2 m) + 1 bits")
    report("1 iterations", wrong_iters == 0,
           f"{wrong_iters}/{chains} chains do not take exactly ceil(log2 m) iterations; "
           f"e.g. m={example[0]}, r={example[1]} took {example[2]}; {off_distance} chains differ from "
           f"bit_length(max(r, m - 1 - r))" if example else f"all {chains} exact")
    assert wrong_ids == 0 and wrong_width == 0
    assert wrong_iters == 0


# ----------------------------------------------------------------- 2


def test_c2_stripes():
    wrong, tasks_total = 0, 0
    xs, ys = [], []
    for n in CORPUS_SIZES:
        for S in corpus(n):
            tasks = [(i, d) for i in range(len(S)) for d in Direction]
            world, group = copies_world(S, len(tasks))
            world.trace = None
            m = len(S)
            flags, rounds = stripe_batch(world, group, [d for _, d in tasks],
                                         [g * m + i for g, (i, _) in enumerate(tasks)])
            base = sorted(S)
            flags = flags.reshape(len(tasks), m)
            for g, (i, d) in enumerate(tasks):
                want = oracle_stripe(base, base[i], d)
                got = {base[k] for k in np.nonzero(flags[g])[0]}
                wrong += got != want
            tasks_total += len(tasks)
            xs.append(m)
            ys.append(float(rounds.mean()))
    xs, ys = np.array(xs, float), np.array(ys)
    fit = stats.linregress(np.log2(xs), ys)
    resid = ys - (fit.slope * np.log2(xs) + fit.intercept)
    trend = stats.linregress(xs, resid)
    ok_fit = trend.pvalue >= RESIDUAL_ALPHA
    report("2 stripe correctness", wrong == 0, f"{wrong}/{tasks_total} (u, d) tasks differ from the oracle")
    report("2 stripe rounds", ok_fit,
           f"rounds = {fit.slope:.2f} log2 n + {fit.intercept:.2f}; residual slope {trend.slope:.2e} "
           f"(p = {trend.pvalue:.3f}, need >= {RESIDUAL_ALPHA})")
    assert wrong == 0
    assert ok_fit


# ----------------------------------------------------------------- 3

MAXIMA_SUBSETS = (1.0, 0.5, 0.1)  # fraction of amoebots in R; 1.0 is R = S


def test_c3_maxima():
    wrong, tasks_total = 0, 0
    xs, ys = [], []
    for n in CORPUS_SIZES:
        for si, S in enumerate(corpus(n)):
            base = sorted(S)
            m = len(base)
            rng = random.Random(si * 31 + n)
            tasks = []
            for frac in MAXIMA_SUBSETS:
                for d in Direction:
                    R = [k for k in range(m) if frac == 1.0 or rng.random() < frac] or [rng.randrange(m)]
                    tasks.append((d, R))
            world, group = copies_world(base, len(tasks), seed=si)
            world.trace = None
            mask = np.zeros(world.n, dtype=bool)
            for g, (_, R) in enumerate(tasks):
                mask[np.asarray(R) + g * m] = True
            res = maxima_batch(world, group, [d for d, _ in tasks], mask)
            flags = res.flags.reshape(len(tasks), m)
            for g, (d, R) in enumerate(tasks):
                got = {base[k] for k in np.nonzero(flags[g])[0]}
                wrong += got != oracle_maxima(base, [base[k] for k in R], d)
            tasks_total += len(tasks)
            xs.append(n)
            ys.append(float(res.rounds.max()))
    xs, ys = np.array(xs), np.array(ys)
    envelope = {n: ys[xs == n].max() for n in CORPUS_SIZES}
    small, mid, large = (math.log2(n) ** 2 for n in CORPUS_SIZES)
    a = (envelope[CORPUS_SIZES[1]] - envelope[CORPUS_SIZES[0]]) / (mid - small)
    b = envelope[CORPUS_SIZES[0]] - a * small
    predicted = a * large + b
    ok_fit = a > 0 and envelope[CORPUS_SIZES[2]] <= predicted
    report("3 maxima correctness", wrong == 0, f"{wrong}/{tasks_total} (R, d) tasks differ from the oracle")
    report("3 maxima rounds", ok_fit,
           f"max rounds {', '.join(f'n={n}: {envelope[n]:.0f}' for n in CORPUS_SIZES)}; envelope "
           f"{a:.2f} log2^2 n + {b:.1f} through the two smaller sizes predicts <= {predicted:.0f} "
           f"at n={CORPUS_SIZES[2]}")
    assert wrong == 0
    assert ok_fit


# ----------------------------------------------------------------- 4

BOUNDARY_TRIALS = 500


def structure_with_holes(holes: int, seed: int) -> list[GridCoord]:
    """First seeded blob with exactly ``holes`` inner regions."""
    rng = random.Random(seed)
    while True:
        S = blob_with_holes(rng.randrange(20, 120), holes, seed=rng.randrange(10 ** 9))
        if sum(not outer for _, outer in empty_regions(S)) == holes:
            return S


def test_c4_boundary_classification():
    wrong_label, wrong_residue, cycles = 0, 0, 0
    holes_seen = set()
    for t in range(BOUNDARY_TRIALS):
        S = structure_with_holes(t % 6, seed=t)
        world = AmoebotWorld(S, pins_per_edge=4, seed=t)
        world.trace = None
        regions = {x: outer for region, outer in empty_regions(S) for x in region}
        holes_seen.add(sum(not o for _, o in empty_regions(S)))
        for b in detect_boundaries(world):
            cycles += 1
            outer = regions[b.region_id]
            wrong_label += b.kind != ("outer" if outer else "inner")
            wrong_residue += b.residue != (1 if outer else 4)
    ok = wrong_label == 0 and wrong_residue == 0
    report("4 boundary classification", ok,
           f"{BOUNDARY_TRIALS} trials, {cycles} cycles, inner-region counts {sorted(holes_seen)}; "
           f"{wrong_label} wrong labels, {wrong_residue} wrong residues")
    assert ok


# ----------------------------------------------------------------- 5


def skeleton_defects(S, sk) -> list[str]:
    out = []
    covered = {o[0] for o in sk.cycle}
    if not boundary_amoebots(S) <= covered:
        out.append("uncovered boundary amoebot")
    visits = Counter(frozenset((v, s)) for v, _, s in sk.cycle if s is not None)
    if visits and max(visits.values()) > 2:
        out.append("bond visited more than twice")
    keys = [(v, p) for v, p, _ in sk.cycle]
    first, last = sk.cycle[0], sk.cycle[-1]
    closes = len(sk.cycle) == 1 or (last[2] == first[0] and first[1] == last[0])
    if len(set(keys)) != len(keys) or not closes:
        out.append("not a single cycle")
    return out


def rotate_occ(o):
    return tuple(None if c is None else rotate_coord(c) for c in o)


def test_c5_skeletons():
    defects, mismatches, runs = Counter(), 0, 0
    equi_bad, equi_runs = 0, 0
    for n in CORPUS_SIZES:
        for si, S in enumerate(corpus(n)):
            for d in Direction:
                for s in (1, -1):
                    world = AmoebotWorld(S, pins_per_edge=4, seed=si)
                    world.trace = None
                    sk = canonical_skeleton(world, d, s)
                    runs += 1
                    defects.update(skeleton_defects(S, sk))
                    mismatches += sk.cycle != oracle_skeleton(S, d, s).cycle
            rng = random.Random(si * 7 + n)
            d, s = Direction(rng.randrange(12)), rng.choice((1, -1))
            a = canonical_skeleton(AmoebotWorld(S, pins_per_edge=4), d, s)
            b = canonical_skeleton(AmoebotWorld(rotate60(S), pins_per_edge=4), rotate(d, 60), s)
            equi_runs += 1
            equi_bad += b.cycle != [rotate_occ(o) for o in a.cycle]
    ok = not defects and mismatches == 0
    report("5 skeleton validity", ok,
           f"{runs} skeletons (all 24 (d, s)); defects {dict(defects) or 'none'}; "
           f"{mismatches} differ from the oracle")
    report("5 skeleton equivariance", equi_bad == 0, f"{equi_bad}/{equi_runs} rotated runs differ")
    assert ok and equi_bad == 0


# ----------------------------------------------------------------- 6

TREE_TRIALS = 500


def test_c6_spanning_tree():
    bad_count, bad_tree, bad_phase1 = 0, 0, 0
    for t in range(TREE_TRIALS):
        rng = random.Random(10_000 + t)
        S = random_blob(rng.randrange(10, 150), t, hole_prob=0.1)
        world = AmoebotWorld(S, pins_per_edge=4, seed=t)
        world.trace = None
        sk = canonical_skeleton(world, Direction(rng.randrange(12)), rng.choice((1, -1)))
        tree = spanning_tree(world, skeleton_path(sk))
        bad_count += len(tree.edges) != len(S) - 1
        bad_tree += not oracle_spanning_check(tree.edges, S)
        bad_phase1 += tree.path_edges != oracle_first_occurrence_edges([o[0] for o in sk.cycle])
    ok = bad_count == bad_tree == bad_phase1 == 0
    report("6 spanning tree", ok,
           f"{TREE_TRIALS} trials; {bad_count} wrong edge counts, {bad_tree} not a tree, "
           f"{bad_phase1} first-occurrence edge sets differ")
    assert ok


# ----------------------------------------------------------------- 7

ELECTION_SEEDS = 1000
ELECTION_SIZES = (16, 64, 256)


def test_c7_leader_election():
    lines_ok, details = True, []
    for n in ELECTION_SIZES:
        two_leaders, done = 0, 0
        for seed in range(ELECTION_SEEDS):
            world = AmoebotWorld(random_blob(n, seed), seed=seed)
            world.trace = None
            res = leader_election(world)
            alive = len(res.survivors[0])
            two_leaders += alive == 0 or res.completed != (alive == 1)
            done += res.completed
        rate = done / ELECTION_SEEDS
        ok = two_leaders == 0 and rate >= 1 - 1 / n
        lines_ok &= ok
        details.append(f"n={n}: {done}/{ELECTION_SEEDS} within {default_phase_budget(n)} phases "
                       f"(need {1 - 1 / n:.4f}), {two_leaders} unsafe")
    report("7 leader election", lines_ok, "; ".join(details))
    assert lines_ok


# ----------------------------------------------------------------- 8

PIT_LENGTHS = (44, 50, 64, 72, 100, 128, 150, 200, 256, 300)
PIT_EQUAL_TRIALS = 10_000
PIT_UNEQUAL_TRIALS = 5_000
CODE_ALPHABET = 7


def code_path(codes) -> EncodedPath:
    return EncodedPath(ChainRef(line(len(codes))), list(codes), Direction.N, 1)


def test_c8_string_equality():
    primes: list[tuple[int, int]] = []
    wrong_equal = 0
    per_m = PIT_EQUAL_TRIALS // len(PIT_LENGTHS)
    for m in PIT_LENGTHS:
        world = AmoebotWorld(line(m), seed=m)
        world.trace = None
        rng = random.Random(m)
        a = [rng.randrange(CODE_ALPHABET) for _ in range(m)]
        A, B = code_path(a), code_path(a)
        plan = plan_equality(world, A, B)
        for _ in range(per_m):
            res = string_equality(world, A, B, plan=plan)
            wrong_equal += not res.equal
            primes.append((m, res.prime))
    report("8a equal strings", wrong_equal == 0,
           f"{wrong_equal}/{per_m * len(PIT_LENGTHS)} equal pairs reported unequal")

    false_equal, bound, pit_trials = 0, 0.0, 0
    per_m = PIT_UNEQUAL_TRIALS // len(PIT_LENGTHS)
    for m in PIT_LENGTHS:
        world = AmoebotWorld(line(m), seed=10 ** 6 + m)
        world.trace = None
        rng = random.Random(-m)
        for _ in range(per_m):
            a = [rng.randrange(CODE_ALPHABET) for _ in range(m)]
            b = [rng.randrange(CODE_ALPHABET) for _ in range(m)]
            plan = plan_equality(world, code_path(a), code_path(a))
            b[plan.prefix:] = a[plan.prefix:]  # equal tails, so the random evaluation decides
            if a == b:
                continue
            res = string_equality(world, code_path(a), code_path(b), plan=plan, repetitions=1)
            pit_trials += 1
            false_equal += res.equal
            bound += m / res.prime
            primes.append((m, res.prime))
    q = bound / pit_trials
    limit = q + PIT_SIGMAS * (q * (1 - q) / pit_trials) ** 0.5
    rate = false_equal / pit_trials
    report("8b false-equal rate", rate <= limit,
           f"{false_equal}/{pit_trials} single-repetition false equals (rate {rate:.4f}, "
           f"limit mean m/p + {PIT_SIGMAS:.0f} sigma = {limit:.4f})")

    not_prime = sum(not sympy.isprime(p) for _, p in primes)
    below = sum(p < 2 * m for m, p in primes)
    above = sum(p >= 4 * m for m, p in primes)
    over = sorted({m for m, p in primes if p >= 4 * m})
    report("8c primes", not_prime == 0, f"{not_prime}/{len(primes)} sampled p composite (sympy)")
    report("8c prime range", below == 0 and above == 0,
           f"{below} with p < 2m, {above}/{len(primes)} with p >= 4m (at m = {over})")

    gate_bad = 0
    for m in range(1, 90):
        world = AmoebotWorld(line(m), seed=m)
        rng = random.Random(m)
        a = [rng.randrange(CODE_ALPHABET) for _ in range(m)]
        b = list(a)
        i = rng.randrange(m)
        b[i] = (b[i] + 1) % CODE_ALPHABET
        for x in (b, list(a)):
            res = string_equality(world, code_path(a), code_path(x))
            gate_bad += (res.stage == "direct") != (m < ETA) or res.equal != (x == a)
    report("8d eta gate", gate_bad == 0, f"{gate_bad} comparisons with m = 1..89 took the wrong path or answer")
    assert wrong_equal == 0 and rate <= limit and not_prime == 0 and gate_bad == 0
    assert below == 0 and above == 0


# ----------------------------------------------------------------- 9

SYMMETRY_SEEDS = 100
SYMMETRY_C = 2


def three_bump_hexagon(radius: int) -> list[GridCoord]:
    """3-fold rotational, mirror-symmetric, not 2-fold."""
    S = set(hexagon(radius))
    S.update(rotate_coord(GridCoord(0, radius + 1), k) for k in (0, 2, 4))
    return sorted(S)


def closure(S, maps) -> list[GridCoord]:
    return sorted({f(v) for v in S for f in maps})


def parallelogram(a: int, b: int) -> list[GridCoord]:
    return [GridCoord(q, r) for q in range(a) for r in range(b)]


def symmetry_corpus() -> list[tuple[str, list[GridCoord]]]:
    out = [(f"asymmetric blob {i}", random_blob(12 + 9 * i, 500 + i)) for i in range(8)]
    out += [(f"parallelogram {a}x{b}", parallelogram(a, b)) for a, b in ((2, 5), (3, 7), (4, 9), (5, 12))]
    out += [(f"2-fold blob {i}", closure(random_blob(10 + 8 * i, 600 + i), [lambda v: v, lambda v: rotate_coord(v, 3)]))
            for i in range(4)]
    out += [(f"triangle {k}", triangle(k)) for k in (3, 5, 8)]
    out += [(f"three-bump hexagon {r}", three_bump_hexagon(r)) for r in (2, 3, 4, 6)]
    out += [(f"3-fold blob {i}", closure(random_blob(8 + 7 * i, 700 + i), [lambda v, k=k: rotate_coord(v, k)
                                                                         for k in (0, 2, 4)])) for i in range(4)]
    out += [(f"hexagon {r}", hexagon(r)) for r in (1, 3, 5)]
    out += [(f"hex ring {r}", hex_ring(r)) for r in (2, 4, 6)]
    out += [(f"6-fold blob {i}", closure(random_blob(6 + 6 * i, 800 + i), [lambda v, k=k: rotate_coord(v, k)
                                                                         for k in range(6)])) for i in range(2)]
    out.append(("rhombus 5", parallelogram(5, 5)))
    out.append(("one-bump hexagon 4", sorted(set(hexagon(4)) | {GridCoord(0, 5)})))
    out.append(("asymmetric holed blob", random_blob(120, 999, hole_prob=0.1)))
    for i, axis in enumerate(AXES):
        for j in range(2):
            S = random_blob(10 + 12 * j + 3 * i, 900 + 10 * i + j)
            out.append((f"mirror {axis.name} blob {j}", closure(S, [lambda v: v, lambda v, a=axis: reflect_coord(v, a)])))
    return out


def symmetry_label(o) -> str:
    if o.rot6:
        return "6-fold"
    if o.rot3:
        return "3-fold"
    if o.rot2:
        return "2-fold"
    return "reflection only" if any(o.reflections.values()) else "asymmetric"


def test_c9_symmetry_detection():
    corpus_ = symmetry_corpus()
    assert len(corpus_) == 50
    classes = Counter()
    axes_seen = set()
    false_neg = false_pos = runs = 0
    for _, S in corpus_:
        assert check_structure(S)
        truth = oracle_symmetry(S)
        classes[symmetry_label(truth)] += 1
        axes_seen |= {a for a in AXES if truth.reflections[a]}
        want = {"rot2": truth.rot2, "rot3": truth.rot3, **{a.name: truth.reflections[a] for a in Direction}}
        paths, plans = None, {}
        for seed in range(SYMMETRY_SEEDS):
            world = AmoebotWorld(S, pins_per_edge=4, seed=seed)
            world.trace = None
            if paths is None:
                paths = symmetry_paths(world)
            rep = detect_symmetries(world, SYMMETRY_C, paths=paths, plans=plans)
            got = {"rot2": rep.rot2, "rot3": rep.rot3, **{a.name: rep.reflections[a] for a in Direction}}
            false_neg += sum(want[k] and not got[k] for k in want)
            false_pos += sum(got[k] and not want[k] for k in want)
            runs += 1
    covered = all(classes[c] for c in ("asymmetric", "2-fold", "3-fold", "6-fold", "reflection only"))
    ok = false_neg == 0 and false_pos == 0 and covered and len(axes_seen) == 6
    report("9 symmetry detection", ok,
           f"{len(corpus_)} structures ({dict(sorted(classes.items()))}, reflection axes in {len(axes_seen)}/6 "
           f"lines) x {SYMMETRY_SEEDS} seeds at c = {SYMMETRY_C}: {false_neg} false negatives, "
           f"{false_pos} false positives")
    assert ok


# ----------------------------------------------------------------- 10

DETERMINISM_TRIALS = 5


def scenario_bytes(name: str, S, seed: int) -> tuple[bytes, bytes]:
    res = run_scenario(ScenarioConfig(name, d=Direction(seed % 12), seed=seed, check=True), S)
    buf = io.StringIO()
    res.world.write_trace(buf)
    return buf.getvalue().encode(), render_svg(res.world.coords, **res.drawing).encode()


def test_c10_determinism(tmp_path):
    differ, trials = 0, 0
    for name in SCENARIOS:
        for t in range(DETERMINISM_TRIALS):
            S = random_blob(20 + 15 * t, 1000 + t, hole_prob=0.1)
            if name == "pasc-demo":
                S = line(10 + 7 * t)
            differ += scenario_bytes(name, S, t) != scenario_bytes(name, S, t)
            trials += 1
    f = tmp_path / "s.txt"
    f.write_text(format_structure(random_blob(60, 3, hole_prob=0.1)))
    outputs = []
    for hashseed in ("1", "2"):
        trace, svg = tmp_path / f"t{hashseed}.jsonl", tmp_path / f"s{hashseed}.svg"
        for name in SCENARIOS[:-1]:
            subprocess.run([sys.executable, "-m", "amoebot.cli", "run", name, "--input", str(f), "--seed", "4",
                            "--trace", str(trace), "--svg", str(svg)], check=True, capture_output=True,
                           env={**os.environ, "PYTHONHASHSEED": hashseed})
            outputs.append((name, hashseed, trace.read_bytes(), svg.read_bytes()))
    half = len(outputs) // 2
    cross = sum(a[2:] != b[2:] for a, b in zip(outputs[:half], outputs[half:]))
    ok = differ == 0 and cross == 0
    report("10 determinism", ok,
           f"{differ}/{trials} in-process repeats differ; {cross}/{half} scenarios differ across processes "
           f"with different hash seeds")
    assert ok
