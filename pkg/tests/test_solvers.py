import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from varbesov.data import random_field, random_profile_trajectory, single_mode
from varbesov.dyadic import build_partition
from varbesov.errors import ComponentError, ConvergenceError, HypothesisError, ParameterError, ZeroModeError
from varbesov.solvers import (BLOW_UP, CONVERGED, KS, NSE, FixedPointConfig, FlowProblem, ScalarToy,
                              continuous_dependence_check, critical_regularity, critical_scaling_check,
                              hypothesis_violations, ks_flux, leray_project, march, max_divergence, nse_flux,
                              picard_solve, run_manifest, theorem_p_plus, verify_bilinear_estimate)
from varbesov.spectral import FREE, Grid, SpectralField, to_physical, to_spectral


def test_leray_single_mode():
    g = Grid(3, 16)
    u = single_mode(g, (1, 1, 0), amplitude=[1.0, 0.0, 0.0], components=3)
    pu = leray_project(u)
    assert np.allclose(pu.coeffs[:, 1, 1, 0], [0.5, -0.5, 0.0], atol=1e-15)
    with pytest.raises(ComponentError):
        leray_project(single_mode(g, (1, 0, 0)))


def test_leray_idempotent_and_divergence_free(rng):
    g = Grid(3, 16)
    u = random_field(g, rng, components=3)
    pu = leray_project(u)
    assert np.abs(leray_project(pu).coeffs - pu.coeffs).max() < 1e-15
    assert np.abs(np.einsum("j...,j...->...", g.xi, pu.coeffs)).max() < 1e-14


def _vec(g, comps):
    return to_spectral(np.stack(comps), g).coeffs[None]


def test_nse_flux_hand_computed():
    # u = (sin x2, 0), v = (0, sin x1): div(u (x) v) = (0, cos x1 sin x2), whose Leray
    # projection is (-sin x1 cos x2 / 2, cos x1 sin x2 / 2)
    g = Grid(2, 32)
    x1, x2 = g.x
    u = _vec(g, [np.sin(x2), 0 * x1])
    v = _vec(g, [0 * x1, np.sin(x1)])
    out = to_physical(SpectralField(g, nse_flux(u, v, g)[0]))
    assert np.abs(out[0] + 0.5 * np.sin(x1) * np.cos(x2)).max() < 1e-13
    assert np.abs(out[1] - 0.5 * np.cos(x1) * np.sin(x2)).max() < 1e-13


def test_taylor_green_is_steady_for_the_nonlinearity():
    # u.grad u is a pure gradient for the Taylor-Green vortex
    g = Grid(2, 32)
    x1, x2 = g.x
    u = _vec(g, [np.sin(x1) * np.cos(x2), -np.cos(x1) * np.sin(x2)])
    assert np.abs(nse_flux(u, u, g)).max() < 1e-14


def test_ks_flux_cosine():
    # psi = cos(kx) / k^2, so div(u grad psi) = -cos(2kx)
    g = Grid(1, 32)
    k = 2
    u = to_spectral(np.cos(k * g.x[0]), g).coeffs[None]
    out = to_physical(SpectralField(g, ks_flux(u, u, g)[0]))
    assert np.abs(out + np.cos(2 * k * g.x[0])).max() < 1e-13
    sym = to_physical(SpectralField(g, ks_flux(u, u, g, "symmetric")[0]))
    assert np.abs(sym - out).max() < 1e-13
    with pytest.raises(ParameterError):
        ks_flux(u, u, g, "weird")


def test_ks_symmetric_form_is_symmetrisation(rng):
    g = Grid(2, 32)
    u = random_field(g, rng, k_max=8).coeffs[None]
    v = random_field(g, rng, k_max=8).coeffs[None]
    sym = ks_flux(u, v, g, "symmetric")
    avg = 0.5 * (ks_flux(u, v, g) + ks_flux(v, u, g))
    assert np.abs(sym - avg).max() < 1e-12 * np.abs(avg).max()


def test_critical_regularity_values():
    assert critical_regularity(NSE, 3, 1.5, 3.0) == pytest.approx(4 - 1.5 - 1)
    assert critical_regularity(KS, 2, 1.5, 2.0) == pytest.approx(2 - 1.5 - 1)
    assert theorem_p_plus(1.5) == pytest.approx(3.0)
    assert hypothesis_violations(1.5, 3.0) == []
    assert len(hypothesis_violations(1.5, 3.2)) == 1
    assert len(hypothesis_violations(0.8, 1.5)) == 2


def test_flow_problem_validation():
    g = Grid(2, 16)
    u = single_mode(g, (1, 0), components=2)
    with pytest.raises(ParameterError):
        FlowProblem("euler", 1.5, u, [0, 1])
    with pytest.raises(ComponentError):
        FlowProblem(KS, 1.5, u, [0, 1])
    with pytest.raises(ZeroModeError):
        FlowProblem(KS, 1.5, SpectralField(g, np.zeros((1,) + g.shape), FREE), [0, 1])


def test_toy_fixed_point():
    toy = ScalarToy(0.1, 1.0)
    u, d = picard_solve(toy, FixedPointConfig(1.0, max_iter=200, tolerance=1e-14))
    assert d.verdict == CONVERGED and abs(u - toy.exact()) < 1e-10
    assert toy.exact() == pytest.approx((1 - math.sqrt(0.6)) / 2, rel=1e-15)
    assert d.within_ball
    u0, d0 = picard_solve(ScalarToy(0.0), FixedPointConfig(1.0))
    assert u0 == 0 and d0.converged
    _, bad = picard_solve(ScalarToy(0.3), FixedPointConfig(1.0, max_iter=200))
    assert bad.smallness_violated and bad.verdict == BLOW_UP and not bad.converged
    assert math.isnan(ScalarToy(0.3).exact())


def test_toy_continuous_dependence():
    y, dy = 0.1, 1e-6
    rep = continuous_dependence_check(ScalarToy(y), ScalarToy(y + dy), FixedPointConfig(1.0, tolerance=1e-15))
    assert rep.passed
    assert rep.ratio == pytest.approx(1 / math.sqrt(1 - 4 * y), rel=0.05)
    with pytest.raises(ConvergenceError):
        continuous_dependence_check(ScalarToy(y), ScalarToy(0.3), FixedPointConfig(1.0, max_iter=30))


def test_fixed_point_config_validation():
    for kw in ({"c_emp": 0.0}, {"c_emp": 1.0, "tolerance": 0.0}, {"c_emp": 1.0, "max_iter": 0}):
        with pytest.raises(ParameterError):
            FixedPointConfig(**kw)


def _nse_problem(rng, scale):
    g = Grid(2, 16)
    u0 = random_field(g, rng, components=2, solenoidal=True, k_max=5)
    u0 = u0.replace(u0.coeffs * scale)
    return FlowProblem(NSE, 1.5, u0, np.linspace(0, 0.5, 9), p=2.5)


def test_nse_small_data_converges_and_matches_marcher(rng):
    prob = _nse_problem(rng, 1e-2)
    u, d = picard_solve(prob, FixedPointConfig(1.0))
    assert d.converged and max(d.divergence) < 1e-12
    assert all(r < 0.5 for r in d.ratios)
    ref = march(prob, substeps=16)
    rel = np.abs(ref.coeffs - u.coeffs).max() / np.abs(u.coeffs).max()
    assert rel < 1e-3
    rows = d.to_rows()
    assert len(rows) == d.iterations + 1 and "x_norm" in rows[0]


def test_zero_data_is_trivial(rng):
    g = Grid(2, 16)
    prob = FlowProblem(KS, 1.5, SpectralField(g, np.zeros((1,) + g.shape)), [0.0, 0.5, 1.0], p=2.5)
    u, d = picard_solve(prob, FixedPointConfig(1.0))
    assert d.converged and d.iterations == 0 and np.all(u.coeffs == 0)
    est = verify_bilinear_estimate(prob, [prob.linear_part()])
    assert all(r.trivial and r.passed for r in est.reports)


def test_bilinear_hypothesis_guard(rng):
    g = Grid(2, 16)
    prob = FlowProblem(KS, 0.8, random_field(g, rng), [0.0, 0.5])
    with pytest.raises(HypothesisError):
        verify_bilinear_estimate(prob, [])
    est = verify_bilinear_estimate(prob, [], strict=False)
    assert est.c_emp == 0.0


def test_bilinear_constants_finite(rng):
    prob = _nse_problem(rng, 1.0)
    part = build_partition(prob.grid)
    samples = [random_profile_trajectory(random_field(prob.grid, rng, components=2, solenoidal=True, k_max=5),
                                         prob.times, rng, alpha=1.5) for _ in range(3)]
    est = verify_bilinear_estimate(prob, samples, part)
    assert 0 < est.c_emp < math.inf and 0 < est.c_lin < math.inf
    labels = {r.label for r in est.reports}
    assert labels == {"bilinear", "bilinear-polarised", "linear-data"}
    assert max_divergence(prob.bilinear(samples[0], samples[1])) < 1e-12


@pytest.mark.parametrize("system,comps", [(NSE, 2), (KS, 1)])
def test_critical_scaling(rng, system, comps):
    g = Grid(2, 32)
    u0 = random_field(g, rng, components=comps)
    assert critical_scaling_check(system, u0, 1.5, 2.5, lam=1.0).lhs <= 1e-15
    assert critical_scaling_check(system, u0, 1.5, 2.5, lam=2.0).passed
    assert critical_scaling_check(system, u0, 1.5, 2.5, lam=0.5).passed
    with pytest.raises(ParameterError):
        critical_scaling_check(system, u0, 1.5, 2.5, lam=3.0)


def test_manifest_is_json(rng):
    import json
    prob = _nse_problem(rng, 1e-2)
    d = json.loads(run_manifest(prob, FixedPointConfig(2.0), seeds={"data": 1}))
    assert d["system"] == NSE and d["grid"]["N"] == 16 and d["seeds"] == {"data": 1}
    assert json.loads(run_manifest(ScalarToy(0.1), FixedPointConfig(1.0)))["y"] == 0.1


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 0.24), st.floats(0.2, 3.0))
def test_toy_root_property(cy, c):
    toy = ScalarToy(cy / c, c)
    u, d = picard_solve(toy, FixedPointConfig(c, max_iter=5000, tolerance=1e-13))
    assert d.converged
    assert abs(u - toy.exact()) <= 1e-9 * max(1.0, abs(toy.exact()))
    assert abs(u) <= 2 * abs(toy.y) * (1 + 1e-9)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_nse_bilinear_symmetric_in_swap_after_polarisation(seed):
    # B(u, v) + B(v, u) is what enters the difference of two iterates
    r = np.random.default_rng(seed)
    g = Grid(2, 16)
    u = random_field(g, r, components=2, solenoidal=True, k_max=5).coeffs[None]
    v = random_field(g, r, components=2, solenoidal=True, k_max=5).coeffs[None]
    lhs = nse_flux(u + v, u + v, g) - nse_flux(u - v, u - v, g)
    rhs = 2 * (nse_flux(u, v, g) + nse_flux(v, u, g))
    assert np.abs(lhs - rhs).max() <= 1e-12 * (1 + np.abs(rhs).max())


def test_toy_identical_data_and_secant():
    cfg = FixedPointConfig(1.0, tolerance=1e-15)
    rep = continuous_dependence_check(ScalarToy(0.1), ScalarToy(0.1), cfg)
    assert rep.lhs == 0 and rep.rhs == 0 and rep.passed
    # secant over [0.1, 0.11] against the derivative 1 / sqrt(1 - 4 y) at y = 0.1
    rep = continuous_dependence_check(ScalarToy(0.1), ScalarToy(0.11), cfg)
    assert rep.ratio == pytest.approx(1 / math.sqrt(0.6), rel=0.05)


def test_nse_bilinear_constant_fields_closed_form():
    # constant-in-time u, v: B(t) = flux (1 - e^{-t lam}) / lam with lam = |(1, 1)|^alpha on the only output modes
    from varbesov.fbnorm import Trajectory
    from varbesov.solvers import nse_bilinear_trajectory
    g = Grid(2, 32)
    x1, x2 = g.x
    alpha = 1.5
    times = np.linspace(0, 2, 5)
    u = Trajectory.constant(SpectralField(g, _vec(g, [np.sin(x2), 0 * x1])[0]), times)
    v = Trajectory.constant(SpectralField(g, _vec(g, [0 * x1, np.sin(x1)])[0]), times)
    out = nse_bilinear_trajectory(u, v, alpha)
    lam = math.sqrt(2) ** alpha
    for k, t in enumerate(times):
        b = to_physical(out.snapshot(k))
        f = (1 - math.exp(-t * lam)) / lam
        assert np.abs(b[0] + 0.5 * f * np.sin(x1) * np.cos(x2)).max() < 1e-10
        assert np.abs(b[1] - 0.5 * f * np.cos(x1) * np.sin(x2)).max() < 1e-10


def test_ks_bilinear_single_mode_closed_form():
    from varbesov.fbnorm import Trajectory
    from varbesov.solvers import ks_bilinear_trajectory
    g = Grid(1, 32)
    alpha = 1.5
    times = np.linspace(0, 1, 4)
    u = Trajectory.constant(to_spectral(np.cos(2 * g.x[0]), g), times)
    out = ks_bilinear_trajectory(u, u, alpha)
    lam = 4.0**alpha
    for k, t in enumerate(times):
        want = -np.cos(4 * g.x[0]) * (1 - math.exp(-t * lam)) / lam
        assert np.abs(to_physical(out.snapshot(k)) - want).max() < 1e-10
    with pytest.raises(ZeroModeError):
        ks_bilinear_trajectory(Trajectory.constant(to_spectral(np.ones(32), g, FREE), times), u, alpha)


def test_critical_scaling_single_mode():
    from varbesov.data import single_mode
    g = Grid(2, 32)
    assert critical_scaling_check(KS, single_mode(g, (2, 1)), 1.5, 2.0).lhs <= 1e-8
    assert critical_scaling_check(NSE, single_mode(g, (2, 1), components=2), 2.0, 2.0, tolerance=1e-10).passed
