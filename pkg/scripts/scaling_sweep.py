"""Round counts over growing random structures, with log and log-squared fits.

    python scripts/scaling_sweep.py --scenario maxima --sizes 16..1024 --trials 3 --csv rounds.csv
"""

import argparse
import io

import numpy as np

from amoebot.cli import SCENARIOS, parse_sizes, run_sweep


def fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Least squares ``y = a x + b``; returns ``(a, b, r^2)``."""
    a, b = np.polyfit(x, y, 1)
    resid = y - (a * x + b)
    total = ((y - y.mean()) ** 2).sum()
    return float(a), float(b), float(1 - (resid ** 2).sum() / total) if total else 1.0


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scenario", default="stripe", choices=SCENARIOS[:-1])
    ap.add_argument("--sizes", default="16..1024")
    ap.add_argument("--shape", default="random", choices=["random", "ring", "blob"])
    ap.add_argument("--trials", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--csv", help="also write the raw rows here")
    args = ap.parse_args()
    buf = io.StringIO()
    rows = run_sweep(args.scenario, parse_sizes(args.sizes), args.shape, args.trials, args.seed, out=buf)
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(buf.getvalue())
    n = np.array([r[2] for r in rows], dtype=float)
    rounds = np.array([r[4] for r in rows], dtype=float)
    for size in sorted(set(n.astype(int))):
        sel = rounds[n == size]
        print(f"n={size:5d}  rounds mean {sel.mean():9.1f}  max {sel.max():7.0f}")
    for label, x in (("log2 n", np.log2(n)), ("log2^2 n", np.log2(n) ** 2)):
        a, b, r2 = fit(x, rounds)
        print(f"rounds ~ {a:.2f} {label} + {b:.2f}  (r^2 = {r2:.3f})")


if __name__ == "__main__":
    main()
