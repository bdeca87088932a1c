"""Empirical constant of the linear heat estimate as a function of T and rho1.

Prints max-over-draws C(T) for each rho1 and the max/min spread.

    python3 scripts/linear_estimate_sweep.py --samples 20 --alpha 1.5
"""
import argparse
import math

from varbesov.harness import ExperimentConfig, run_experiment


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=20)
    ap.add_argument("--alpha", type=float, default=1.5)
    ap.add_argument("--dim", type=int, default=2)
    ap.add_argument("--n", type=int, default=64)
    ap.add_argument("--nodes", type=int, default=200)
    ap.add_argument("--horizons", default="0.1,1,10,40")
    ap.add_argument("--forcing", choices=["none", "profile"], default="none")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    horizons = tuple(float(h) for h in args.horizons.split(","))
    cfg = ExperimentConfig("linear-estimate", "linear-estimate", args.seed, samples=args.samples, dim=args.dim,
                           n=args.n, alpha=args.alpha, nodes=args.nodes, horizons=horizons,
                           rho1=(1.0, 2.0, math.inf), forcing=args.forcing)
    s = run_experiment(cfg)
    table: dict = {}
    for rho1, T, ratio in zip(s.columns["rho1"], s.columns["horizon"], s.columns["ratio"]):
        table.setdefault(rho1, {}).setdefault(T, []).append(ratio)
    print("rho1   " + "".join(f"T={T:<10g}" for T in horizons) + "spread")
    for rho1, by_t in table.items():
        consts = [max(by_t[T]) for T in horizons]
        print(f"{rho1:<6g} " + "".join(f"{c:<12.6f}" for c in consts) + f"{max(consts) / min(consts):.4f}")
    print(f"max quadrature indicator {max(s.columns['quadrature_error']):.3e}; "
          f"{s.passed}/{s.total} checks passed in {s.wall_time:.1f} s")


if __name__ == "__main__":
    main()
