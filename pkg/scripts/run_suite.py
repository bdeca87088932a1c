"""Run built-in suites (or an INI file) and print a per-experiment table.

    python3 scripts/run_suite.py verify heat --out results --seed 0
    python3 scripts/run_suite.py --config my.ini
"""
import argparse
import sys

from varbesov.harness import emit_reports, load_config, parse_config, run_all
from varbesov.suites import SUITES


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("suites", nargs="*", help=f"any of {', '.join(sorted(SUITES))}; all when empty")
    ap.add_argument("--config")
    ap.add_argument("--out", default="results")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    unknown = set(args.suites) - set(SUITES)
    if unknown:
        ap.error(f"unknown suites: {', '.join(sorted(unknown))}")
    configs = load_config(args.config, args.seed) if args.config else []
    for name in args.suites or ([] if args.config else sorted(SUITES)):
        configs += parse_config(SUITES[name], args.seed)
    summaries = run_all(configs, args.threads)
    emit_reports(summaries, args.out)
    print(f"{'experiment':<24} {'suite':<18} {'passed':>7} {'failed':>7} {'time/s':>8}")
    for s in summaries:
        print(f"{s.name:<24} {s.experiment:<18} {s.passed:>7d} {s.failed:>7d} {s.wall_time:>8.1f}")
    return 0 if all(s.ok for s in summaries) else 1


if __name__ == "__main__":
    sys.exit(main())
