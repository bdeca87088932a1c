"""Write the radial cutoff profile and the per-shell lattice statistics of a grid.

    python3 scripts/partition_profile.py --dim 2 --n 64 --out partition.json
"""
import argparse
import json

import numpy as np

from varbesov.dyadic import build_partition
from varbesov.spectral import Grid


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--dim", type=int, default=2)
    ap.add_argument("--n", type=int, default=64)
    ap.add_argument("--box", type=float, default=1.0)
    ap.add_argument("--out", default="partition.json")
    args = ap.parse_args()
    part = build_partition(Grid(args.dim, args.n, args.box))
    info = part.to_json()
    r = part.grid.xi_norm.reshape(-1)
    info["shells"] = [{"j": j, "points": int(idx.size), "r_min": float(r[idx].min()), "r_max": float(r[idx].max()),
                       "full_weight": int(np.sum(vals == 1.0))} for j, (idx, vals) in zip(part.js, part.supports)]
    info["unity_deviation"] = part.unity_deviation()
    with open(args.out, "w") as fh:
        json.dump(info, fh, indent=1)
    print(f"j in [{part.j_min}, {part.j_max}], max |sum phi_j - 1| = {info['unity_deviation']:.2e}")
    for sh in info["shells"]:
        print(f"  j = {sh['j']:>2}: {sh['points']:>6} points, |xi| in [{sh['r_min']:.3f}, {sh['r_max']:.3f}]")


if __name__ == "__main__":
    main()
