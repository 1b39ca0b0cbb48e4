"""Distribution of the reduction's numeric deviation over many random forests.

The acceptance check uses 50 forests from one seed; this script runs more
seeds to show how much headroom the 1e-6 tolerance has at n=64.

    python scripts/random_soundness.py --seeds 0 1 2 3 --count 200
"""

import argparse
import random
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from oplinear.rewrite import reduce  # noqa: E402
from oplinear.numeric import verify_equivalence  # noqa: E402
from tests.random_inputs import random_bindings, random_forest  # noqa: E402


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2, 3])
    ap.add_argument("--count", type=int, default=200)
    ap.add_argument("--max-edges", type=int, default=6)
    ap.add_argument("--n", type=int, default=64)
    ap.add_argument("--tol", type=float, default=1e-6)
    args = ap.parse_args()
    for seed in args.seeds:
        rng = random.Random(seed)
        devs = []
        for _ in range(args.count):
            f = random_forest(rng, args.max_edges)
            b = random_bindings(rng)
            out, _ = reduce(f)
            devs.append(verify_equivalence(f, out, b, n=args.n, tol=args.tol).max_rel)
        devs = np.array(devs)
        first = devs[:50]
        print(f"seed {seed}: median {np.median(devs):.2e}  p99 {np.quantile(devs, 0.99):.2e}  "
              f"max {devs.max():.2e}  over tol {int((devs > args.tol).sum())}/{len(devs)}  "
              f"(first 50: max {first.max():.2e})")


if __name__ == "__main__":
    main()
