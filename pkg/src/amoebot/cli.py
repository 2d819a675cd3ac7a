"""Command line scenario runner.

``amoebot run <scenario> ...`` runs one algorithm on a structure file and
prints a report; ``amoebot sweep ...`` prints round counts over seeded random
structures as CSV.  Exit codes: 0 ok, 1 oracle mismatch, 2 error.
"""

from __future__ import annotations

import argparse
import random
import sys
from dataclasses import dataclass, field
from typing import Sequence

from . import oracle
from .engine import AmoebotWorld, EngineError, RoundBudgetExhausted
from .grid import Direction, GridCoord
from .pasc import ChainRef, pasc_run
from .shapes import ParseError, hex_ring, parse_structure, random_blob
from .skeleton import canonical_skeleton, skeleton_path, spanning_tree
from .spatial import global_maxima, stripe_algorithm
from .svg import render_svg
from .symmetry import detect_symmetries

SCENARIOS = ("stripe", "maxima", "skeleton", "spanning-tree", "symmetry", "pasc-demo")
DEFAULT_PINS = {"stripe": 2, "maxima": 2, "skeleton": 4, "spanning-tree": 4, "symmetry": 4, "pasc-demo": 2}


class OracleMismatch(Exception):
    pass


@dataclass
class ScenarioConfig:
    name: str
    d: Direction = Direction.N
    s: int = 1
    ref: GridCoord | None = None
    seed: int = 0
    pins: int | None = None
    c: int = 2
    subset: float = 1.0  # fraction of amoebots in R for maxima
    max_rounds: int | None = None
    check: bool = False


@dataclass
class ScenarioResult:
    report: dict
    world: AmoebotWorld
    agree: bool | None = None
    mismatch: str = ""
    drawing: dict = field(default_factory=dict)


def _fmt_coords(cs) -> str:
    return " ".join(f"({c[0]},{c[1]})" for c in sorted(cs))


def _first_difference(got: dict, want: dict) -> str:
    for key in sorted(set(got) | set(want), key=str):
        a, b = got.get(key), want.get(key)
        if a == b:
            continue
        if isinstance(a, list) and isinstance(b, list):
            i = next((i for i, (x, y) in enumerate(zip(a, b)) if x != y), min(len(a), len(b)))
            return (f"{key}[{i}]: got {a[i] if i < len(a) else 'end'!r}, "
                    f"oracle {b[i] if i < len(b) else 'end'!r} (lengths {len(a)}, {len(b)})")
        return f"{key}: got {a!r}, oracle {b!r}"
    return ""


def run_scenario(cfg: ScenarioConfig, coords: Sequence) -> ScenarioResult:
    if cfg.name not in SCENARIOS:
        raise ValueError(f"unknown scenario {cfg.name!r}")
    pins = cfg.pins if cfg.pins is not None else DEFAULT_PINS[cfg.name]
    if cfg.name == "pasc-demo":
        # the file order is the chain; the structure is its set of positions
        chain_pos = [GridCoord(*c) for c in coords]
        world = AmoebotWorld(sorted(set(chain_pos)), pins_per_edge=pins, seed=cfg.seed)
    else:
        world = AmoebotWorld(coords, pins_per_edge=pins, seed=cfg.seed)
    S = world.coords
    ref = cfg.ref if cfg.ref is not None else S[0]
    report: dict = {"scenario": cfg.name, "n": world.n, "pins": pins, "seed": cfg.seed}
    got = want = None
    drawing: dict = {}
    if cfg.name == "stripe":
        flags = stripe_algorithm(world, ref, cfg.d)
        members = {c for c, f in flags.items() if f}
        report.update(ref=f"({ref[0]},{ref[1]})", dir=cfg.d.name, members=_fmt_coords(members))
        drawing["highlight"] = members
        if cfg.check:
            got, want = {"members": members}, {"members": oracle.oracle_stripe(S, ref, cfg.d)}
    elif cfg.name == "maxima":
        rng = random.Random(cfg.seed)
        R = [c for c in S if rng.random() < cfg.subset] or [S[0]]
        flags = global_maxima(world, R, cfg.d)
        top = {c for c, f in flags.items() if f}
        report.update(dir=cfg.d.name, candidates=len(R), maxima=_fmt_coords(top))
        drawing["highlight"] = top
        if cfg.check:
            got, want = {"maxima": top}, {"maxima": oracle.oracle_maxima(S, R, cfg.d)}
    elif cfg.name in ("skeleton", "spanning-tree"):
        sk = canonical_skeleton(world, cfg.d, cfg.s)
        report.update(dir=cfg.d.name, sign="+" if cfg.s == 1 else "-", split=f"({sk.split[0]},{sk.split[1]})",
                      occurrences=len(sk.cycle))
        drawing.update(boundary=oracle.boundary_amoebots(S), split=sk.split,
                       path=[o[0] for o in sk.cycle] + [sk.cycle[0][0]])
        if cfg.check:
            ref_sk = oracle.oracle_skeleton(S, cfg.d, cfg.s)
            got, want = {"cycle": sk.cycle}, {"cycle": ref_sk.cycle}
        if cfg.name == "spanning-tree":
            tree = spanning_tree(world, skeleton_path(sk))
            report.update(root=f"({tree.root[0]},{tree.root[1]})", edges=len(tree.edges))
            drawing.update(edges=tree.edges, path=None)
            if cfg.check:
                ok = oracle.oracle_spanning_check(tree.edges, S)
                first = oracle.oracle_first_occurrence_edges([o[0] for o in sk.cycle])
                got = {**got, "tree_valid": True, "path_edges": tree.path_edges}
                want = {**want, "tree_valid": ok, "path_edges": first}
    elif cfg.name == "symmetry":
        rep = detect_symmetries(world, cfg.c)
        report.update(c=cfg.c, rot2=rep.rot2, rot3=rep.rot3, rot6=rep.rot6,
                      reflections=" ".join(d.name for d in Direction if rep.reflections[d]) or "none")
        if cfg.check:
            o = oracle.oracle_symmetry(S)
            got = {"rot2": rep.rot2, "rot3": rep.rot3, "rot6": rep.rot6,
                   **{f"reflect {d.name}": rep.reflections[d] for d in Direction}}
            want = {"rot2": o.rot2, "rot3": o.rot3, "rot6": o.rot6,
                    **{f"reflect {d.name}": o.reflections[d] for d in Direction}}
    elif cfg.name == "pasc-demo":
        ri = chain_pos.index(GridCoord(*ref)) if cfg.ref is not None else 0
        ids = pasc_run(world, ChainRef(chain_pos, ri))
        report.update(ref_index=ri, ids=" ".join(map(str, ids.ids)), iterations=ids.iterations)
        drawing.update(path=chain_pos, split=chain_pos[ri])
        if cfg.check:
            got = {"ids": ids.ids}
            want = {"ids": [i - ri for i in range(len(chain_pos))]}
    report["rounds"] = world.round
    if cfg.max_rounds is not None and world.round > cfg.max_rounds:
        raise RoundBudgetExhausted(f"{world.round} rounds exceed the budget of {cfg.max_rounds}")
    res = ScenarioResult(report=report, world=world, drawing=drawing)
    if cfg.check:
        res.mismatch = _first_difference(got, want)
        res.agree = not res.mismatch
        report["oracle"] = "agree" if res.agree else "MISMATCH"
    return res


# ----------------------------------------------------------------- sweep


def sweep_structure(shape: str, n: int, seed: int) -> list[GridCoord]:
    if shape == "random":
        return random_blob(n, seed)
    if shape == "blob":
        return random_blob(n, seed, hole_prob=0.05)
    if shape == "ring":
        return hex_ring(max(1, round(n / 6)))
    raise ValueError(f"unknown shape {shape!r}")


def parse_sizes(text: str) -> list[int]:
    """``"16..2048"`` (powers of two in range) or a comma list."""
    if ".." in text:
        lo, hi = (int(x) for x in text.split("..", 1))
        out, v = [], 1
        while v <= hi:
            if v >= lo:
                out.append(v)
            v *= 2
        return out
    return [int(x) for x in text.split(",") if x.strip()]


def run_sweep(scenario: str, sizes: Sequence[int], shape: str, trials: int, seed: int = 0,
              out=sys.stdout) -> list[tuple]:
    rows = []
    out.write("scenario,shape,n,trial,rounds\n")
    for n in sizes:
        for t in range(trials):
            coords = sweep_structure(shape, n, seed * 1_000_003 + n * 1009 + t)
            rng = random.Random(t)
            cfg = ScenarioConfig(name=scenario, d=Direction(rng.randrange(12)), seed=t,
                                 ref=rng.choice(sorted(coords)))
            res = run_scenario(cfg, coords)
            rows.append((scenario, shape, len(coords), t, res.world.round))
            out.write(f"{scenario},{shape},{len(coords)},{t},{res.world.round}\n")
    return rows


# ------------------------------------------------------------------ main


def _parse_ref(text: str) -> GridCoord:
    parts = text.replace(",", " ").split()
    if len(parts) != 2:
        raise ValueError(f"reference must be 'q,r', got {text!r}")
    return GridCoord(int(parts[0]), int(parts[1]))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="amoebot", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="cmd", required=True)
    run = sub.add_parser("run", help="run one scenario on a structure file")
    run.add_argument("scenario", choices=SCENARIOS)
    run.add_argument("--input", required=True, help="structure file, one 'q r' pair per line")
    run.add_argument("--dir", default="N", help="direction name, e.g. N or ENE")
    run.add_argument("--sign", default="+", choices=["+", "-"])
    run.add_argument("--ref", help="reference amoebot as 'q,r'")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--pins", type=int, help="pins per edge (default depends on the scenario)")
    run.add_argument("--max-rounds", type=int)
    run.add_argument("--c", type=int, default=2, help="repetition constant for symmetry detection")
    run.add_argument("--subset", type=float, default=1.0, help="fraction of amoebots in R (maxima)")
    run.add_argument("--check", action="store_true", help="compare with the oracle")
    run.add_argument("--trace", help="write the round trace (JSON lines)")
    run.add_argument("--svg", help="write an SVG drawing")
    sw = sub.add_parser("sweep", help="round counts over seeded random structures")
    sw.add_argument("--scenario", default="stripe", choices=SCENARIOS[:-1])
    sw.add_argument("--sizes", default="16..256")
    sw.add_argument("--shape", default="random", choices=["random", "ring", "blob"])
    sw.add_argument("--trials", type=int, default=3)
    sw.add_argument("--seed", type=int, default=0)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.cmd == "sweep":
            run_sweep(args.scenario, parse_sizes(args.sizes), args.shape, args.trials, args.seed)
            return 0
        with open(args.input) as fh:
            coords = parse_structure(fh)
        cfg = ScenarioConfig(name=args.scenario, d=Direction.parse(args.dir), s=1 if args.sign == "+" else -1,
                             ref=_parse_ref(args.ref) if args.ref else None, seed=args.seed, pins=args.pins,
                             c=args.c, subset=args.subset, max_rounds=args.max_rounds, check=args.check)
        res = run_scenario(cfg, coords)
    except (ParseError, EngineError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for key, val in res.report.items():
        print(f"{key}: {val}")
    if args.trace:
        res.world.write_trace(args.trace)
    if args.svg:
        with open(args.svg, "w") as fh:
            fh.write(render_svg(res.world.coords, title=f"{args.scenario} {args.dir}", **res.drawing))
    try:
        if res.agree is False:
            raise OracleMismatch(res.mismatch)
    except OracleMismatch as exc:
        print(f"counterexample: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
