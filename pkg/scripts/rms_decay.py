"""RMS error of replicate-averaged covariance estimates as the sequence length grows.

    python scripts/rms_decay.py --reps 1000 --out results/rms.csv
"""

import argparse
import math
from pathlib import Path

from improper_sim.covariance import fgn_normalizer
from improper_sim.validation import rms_experiment, rms_to_csv


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--hurst", type=float, default=0.75)
    ap.add_argument("--ratio", type=float, default=0.5, help="B^2 / A^2")
    ap.add_argument("--n-min", type=int, default=10)
    ap.add_argument("--n-max", type=int, default=1000)
    ap.add_argument("--n-step", type=int, default=10)
    ap.add_argument("--reps", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out", type=Path, default=Path("results/rms.csv"))
    args = ap.parse_args()

    A = 1 / math.sqrt(fgn_normalizer(args.hurst))
    B = math.sqrt(args.ratio) * A
    n_values = range(args.n_min, args.n_max + 1, args.n_step)
    results = rms_experiment(args.hurst, A, B, n_values, args.reps, args.seed, workers=args.threads)

    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(rms_to_csv(results))
    for r in results[:: max(1, len(results) // 10)]:
        print(f"n={r.n:5d}  rms_s={r.rms_s:.4f}  rms_r={r.rms_r:.4f}")
    worst = max(max(r.rms_s, r.rms_r) for r in results)
    print(f"largest rms over all n: {worst:.4f}; wrote {args.out}")


if __name__ == "__main__":
    main()
