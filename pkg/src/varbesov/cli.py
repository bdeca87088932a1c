"""Command line entry point.

    varbesov {verify,heat,nse,ks,sweep,report} [--config PATH] [--out DIR] [--seed N] [--threads N]

Without ``--config`` each subcommand runs its built-in suite.  With a
configuration, ``verify`` runs every section and the other subcommands run
the sections whose suite belongs to them.  The exit status is 0 exactly when
every check passes.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import ConfigError
from .harness import emit_reports, load_config, parse_config, run_all
from .suites import SUITES

GROUPS = {
    "heat": {"linear-estimate"},
    "nse": {"bilinear", "fixed-point"},
    "ks": {"bilinear", "fixed-point", "smallness-sweep"},
    "sweep": {"smallness-sweep"},
}
SYSTEM = {"nse": "nse", "ks": "keller_segel"}


def _select(command: str, configs):
    if command == "verify":
        return configs
    out = [c for c in configs if c.experiment in GROUPS[command]]
    if command in SYSTEM:
        out = [c for c in out if c.system == SYSTEM[command] or c.experiment not in ("bilinear", "fixed-point",
                                                                                    "smallness-sweep")]
    return out


def _report(out_dir: Path) -> int:
    path = out_dir / "reports.jsonl"
    try:
        rows = [json.loads(line) for line in path.read_text().splitlines() if line.strip()]
    except OSError as exc:
        print(f"cannot read {path}: {exc}", file=sys.stderr)
        return 2
    counts: dict = {}
    for row in rows:
        c = counts.setdefault(row["experiment"], [0, 0])
        c[0 if row["passed"] else 1] += 1
    for name, (ok, bad) in counts.items():
        print(f"{'PASS' if bad == 0 else 'FAIL'} {name}: {ok} passed, {bad} failed")
    return 0 if all(bad == 0 for _, bad in counts.values()) else 1


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="varbesov", description="Variable-exponent Fourier-Besov experiment harness")
    ap.add_argument("command", choices=["verify", "heat", "nse", "ks", "sweep", "report"])
    ap.add_argument("--config", type=Path, help="INI file with one section per experiment")
    ap.add_argument("--out", type=Path, default=Path("results"), help="output directory")
    ap.add_argument("--seed", type=int, help="override every experiment's seed")
    ap.add_argument("--threads", type=int, default=1, help="experiments run concurrently")
    args = ap.parse_args(argv)

    if args.command == "report":
        return _report(args.out)
    try:
        if args.config is not None:
            configs = _select(args.command, load_config(args.config, args.seed))
        else:
            configs = parse_config(SUITES[args.command], args.seed)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    summaries = run_all(configs, max(1, args.threads))
    try:
        emit_reports(summaries, args.out)
    except OSError as exc:
        print(exc, file=sys.stderr)
        return 2
    for s in summaries:
        status = "PASS" if s.ok else "FAIL"
        print(f"{status} {s.name}: {s.passed}/{s.total} checks passed ({s.wall_time:.1f} s)")
    return 0 if all(s.ok for s in summaries) else 1


if __name__ == "__main__":
    sys.exit(main())
