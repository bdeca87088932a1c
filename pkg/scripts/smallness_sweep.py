"""Convergence of the Picard iteration against the data size.

Data sizes are multiples of 1 / (4 C_emp C_lin), the measured threshold.

    python3 scripts/smallness_sweep.py --system keller_segel --alpha 1.2
"""
import argparse

from varbesov.harness import ExperimentConfig, smallness_sweep


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--system", choices=["nse", "keller_segel"], default="nse")
    ap.add_argument("--alpha", type=float, default=1.5)
    ap.add_argument("--dim", type=int, default=2)
    ap.add_argument("--n", type=int, default=32)
    ap.add_argument("--runs", type=int, default=5)
    ap.add_argument("--multiples", default="0.25,0.5,1,2,4,8,16,32,64")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    cfg = ExperimentConfig("sweep", "smallness-sweep", args.seed, samples=args.runs, dim=args.dim, n=args.n,
                           alpha=args.alpha, system=args.system)
    s = smallness_sweep(cfg, [float(m) for m in args.multiples.split(",")])
    e = s.extra
    print(f"C_emp = {e['c_emp']:.4e}  C_lin = {e['c_lin']:.4f}  eps_theory = {e['eps_theory']:.4e}")
    print(f"runs converged at eps_safe: {e.get('converged_fraction', float('nan')):.0%}")
    print(f"{'eps/eps_theory':>15} {'converged':>10} {'iterations':>11} {'final X-norm':>14}")
    for eps, run, conv, xn, it in zip(*(s.columns[k] for k in ("eps", "run", "converged", "x_norm", "iterations"))):
        if run < 0:
            print(f"{eps / e['eps_theory']:>15.3g} {bool(conv)!s:>10} {it:>11d} {xn:>14.4e}")
    print(f"eps* = {e['eps_star']:.4e} ({e['eps_star'] / e['eps_theory']:.3g} x eps_theory)")


if __name__ == "__main__":
    main()
