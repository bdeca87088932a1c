"""Acceptance criteria 1-10, each at its stated tolerance and time budget.

Each test records a PASS/FAIL line that the terminal summary prints.
"""
import math
import time
from contextlib import contextmanager

import pytest

from conftest import record
from varbesov.cli import main
from varbesov.harness import parse_config, run_all


@contextmanager
def criterion(number, text):
    ok = False
    try:
        yield
        ok = True
    finally:
        record(number, text, ok)


def run(text):
    start = time.perf_counter()
    summaries = run_all(parse_config(text))
    return {s.name: s for s in summaries}, time.perf_counter() - start


def failures(summaries):
    return [(s.name, r.label, r.ratio, r.metadata.get("error")) for s in summaries.values()
            for r in s.reports if not r.passed]


def test_criterion_01_partition_of_unity():
    with criterion(1, "partition of unity <= 1e-12 and quasi-orthogonality, d=1,2 N=64, < 1 s"):
        res, wall = run("""
[d1]
experiment = partition-unity
seed = 0
dim = 1
n = 64
[d2]
experiment = partition-unity
seed = 0
dim = 2
n = 64
""")
        assert not failures(res)
        assert all(s.worst["partition-unity"] <= 1e-12 for s in res.values())
        assert all(s.worst["quasi-orthogonality"] == 0.0 for s in res.values())
        assert wall < 1.0


def test_criterion_02_variable_lebesgue():
    with criterion(2, "variable Lebesgue norm: reduction, homogeneity, triangle, Holder <= 2 on 1000 draws, < 10 s"):
        res, wall = run("[lebesgue-norm]\nseed = 0\nsamples = 1000\nn = 32\n")
        s = res["lebesgue-norm"]
        assert not failures(res)
        counts = {}
        for r in s.reports:
            counts[r.label] = counts.get(r.label, 0) + 1
        assert counts == {"lebesgue-constant-reduction": 1000, "lebesgue-homogeneity": 1000,
                          "lebesgue-triangle": 1000, "holder": 1000}
        assert s.worst["lebesgue-constant-reduction"] <= 1e-12
        assert s.worst["holder"] <= 2.0
        assert wall < 10.0


def test_criterion_03_fractional_heat():
    with criterion(3, "fractional heat: semigroup, monotonicity, uniform linear constant (1.5x), kappa bound, < 60 s"):
        res, wall = run("""
[linear-estimate]
seed = 0
samples = 100
dim = 2
n = 64
alpha = 1.5
exponent = decay
nodes = 200
horizons = 0.1, 1, 10, 40
rho1 = 1, 2, inf
""")
        s = res["linear-estimate"]
        assert not failures(res)
        assert s.worst["semigroup-composition"] <= 1e-13
        assert s.worst["shell-decay"] <= 1.0 + 1e-15
        spreads = [r for r in s.reports if r.label == "linear-constant-uniformity"]
        assert sorted(r.metadata["rho1"] for r in spreads) == [1.0, 2.0, math.inf]
        assert all(r.ratio <= 1.5 for r in spreads)
        per_draw = [r for r in s.reports if r.label == "linear-estimate"]
        assert len(per_draw) == 100 * 4 * 3
        assert wall < 60.0


def test_criterion_04_leray():
    with criterion(4, "Leray projection: idempotent, divergence-free, kills gradients, fixes solenoidal fields"):
        res, _ = run("[leray]\nseed = 0\nsamples = 20\ndim = 3\nn = 32\n")
        s = res["leray"]
        assert not failures(res)
        assert {r.label for r in s.reports} == {"leray-idempotence", "leray-divergence-free", "leray-gradient",
                                                 "leray-solenoidal"}
        assert max(s.worst.values()) <= 1e-13


def test_criterion_05_bilinear():
    with criterion(5, "bilinear ratios finite and stable within 2x for N=32->64, d=3 run, KS identity, < 5 min"):
        res, wall = run("""
[nse-2d]
experiment = bilinear
system = nse
seed = 0
samples = 100
dim = 2
n = 32
refine = 2
[ks-2d]
experiment = bilinear
system = keller_segel
seed = 0
samples = 100
dim = 2
n = 32
refine = 2
[nse-3d]
experiment = bilinear
system = nse
seed = 0
samples = 10
dim = 3
n = 32
[ks-3d]
experiment = bilinear
system = keller_segel
seed = 0
samples = 10
dim = 3
n = 32
""")
        assert not failures(res)
        for s in res.values():
            ratios = [r.ratio for r in s.reports if r.label.startswith("bilinear")]
            assert ratios and all(math.isfinite(x) for x in ratios)
            assert 0 < s.extra["c_emp"] < math.inf
        for name in ("nse-2d", "ks-2d"):
            s = res[name]
            assert s.worst["bilinear-refinement"] <= 2.0
            assert math.isfinite(s.extra["c_emp_refined"])
        for name in ("ks-2d", "ks-3d"):
            assert res[name].worst["ks-symmetric-identity"] <= 1e-10
        assert wall < 300.0


def test_criterion_06_fixed_point():
    with criterion(6, "fixed point: toy root, geometric convergence at margin 0.5, ball, continuous dependence, < 5 min"):
        res, wall = run("""
[defaults]
seed = 0
samples = 10
dim = 3
n = 32
nodes = 16
margin = 0.5
experiment = fixed-point
[nse]
system = nse
[ks]
system = keller_segel
""")
        assert not failures(res)
        for s in res.values():
            assert s.worst["toy-fixed-point"] <= 1e-10
            assert s.extra["converged"] and s.extra["verdict"] == "converged"
            margin = s.extra["margin"]
            assert margin <= 0.5
            assert s.worst["picard-contraction"] <= margin + 0.05
            assert s.extra["final_x_norm"] <= 2 * s.extra["eta"] * (1 + 1e-6)
            cd = [r for r in s.reports if r.label == "continuous-dependence"]
            assert len(cd) == 1 and cd[0].ratio <= 1.1 / (1 - margin)
        assert res["nse"].worst["picard-divergence-free"] <= 1e-12
        assert wall < 300.0


def test_criterion_07_smallness_sweep():
    with criterion(7, "smallness sweep: 20/20 converge at eps_safe, KS alpha=1.2 eps=1e3 blow-up guard, eps* reported"):
        res, wall = run("""
[defaults]
experiment = smallness-sweep
seed = 0
samples = 20
margin = 0.25
epsilons = 0.25, 0.5, 1, 2, 4, 8, 16, 32
[sweep-nse]
system = nse
[sweep-ks]
system = keller_segel
alpha = 1.2
blowup_eps = 1000
""")
        assert not failures(res)
        for s in res.values():
            assert s.extra["converged_fraction"] == 1.0
            assert sum(r.label == "smallness-converged" for r in s.reports) == 20
            assert s.extra["eps_safe"] <= 0.25 / (4 * s.extra["c_emp"] * s.extra["c_lin"]) * (1 + 1e-12)
            assert s.extra["eps_star"] > 0 and math.isfinite(s.extra["eps_theory"])
        assert res["sweep-ks"].extra["blowup_verdict"] == "blow-up-suspected"
        assert wall < 600.0


def test_criterion_08_critical_scaling():
    with criterion(8, "critical norms invariant under lambda = 2 within 1e-8"):
        res, _ = run("""
[a]
experiment = critical-scaling
seed = 0
samples = 10
alpha = 1.5
p0 = 2.5
[b]
experiment = critical-scaling
seed = 1
samples = 10
alpha = 1.2
p0 = 2.2
dim = 3
n = 32
""")
        assert not failures(res)
        for s in res.values():
            assert sum(r.label == "critical-scaling" for r in s.reports) == 20
            assert s.worst["critical-scaling"] <= 1e-8


def test_criterion_09_function_spaces():
    with criterion(9, "embedding, interpolation, product, maximal, Riesz: finite, interpolation <= 1+1e-10, refinement stable"):
        res, wall = run("[function-spaces]\nseed = 0\nsamples = 20\nrefine = 2\n")
        s = res["function-spaces"]
        assert not failures(res)
        assert all(math.isfinite(r.ratio) for r in s.reports)
        assert s.worst["interpolation"] <= 1 + 1e-10
        refine = [k for k in s.worst if k.startswith("refinement-")]
        assert {"refinement-embedding", "refinement-interpolation", "refinement-product-symmetric",
                "refinement-maximal-function", "refinement-riesz"} <= set(refine)
        assert all(s.worst[k] <= 2.0 for k in refine)
        assert wall < 120.0


@pytest.mark.parametrize("suite", ["verify", "ks"])
def test_criterion_10_determinism(tmp_path, suite):
    with criterion(10, "same seed reruns give byte-identical reports.jsonl"):
        a, b = tmp_path / "a", tmp_path / "b"
        assert main([suite, "--seed", "7", "--out", str(a)]) == 0
        assert main([suite, "--seed", "7", "--out", str(b), "--threads", "2"]) == 0
        assert (a / "reports.jsonl").read_bytes() == (b / "reports.jsonl").read_bytes()
        assert (a / "reports.jsonl").stat().st_size > 0
