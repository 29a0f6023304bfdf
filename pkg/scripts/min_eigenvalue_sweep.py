"""Smallest circulant eigenvalue of improper fGn over a grid of H and n.

Writes a long-format CSV (H,n,min_eig) and prints a wide table, one row per H.

    python scripts/min_eigenvalue_sweep.py --out results/min_eig.csv
"""

import argparse
from pathlib import Path

from improper_sim.validation import DEFAULT_SWEEP_H, DEFAULT_SWEEP_N, min_eigenvalue_sweep


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--hurst", type=float, nargs="+", default=list(DEFAULT_SWEEP_H))
    ap.add_argument("--n", type=int, nargs="+", default=list(DEFAULT_SWEEP_N))
    ap.add_argument("-A", type=float, default=1.0)
    ap.add_argument("-B", type=float, default=2**-0.5)
    ap.add_argument("--out", type=Path, default=Path("results/min_eig.csv"))
    args = ap.parse_args()

    table = min_eigenvalue_sweep(args.hurst, args.n, args.A, args.B)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(table.to_csv())

    grid = table.grid()
    print("H \\ n   " + " ".join(f"{n:>9d}" for n in args.n))
    for H in args.hurst:
        print(f"{H:<8g}" + " ".join(f"{grid[(H, n)]:9.5f}" for n in args.n))
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
