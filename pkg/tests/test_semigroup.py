import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from varbesov.data import random_field, single_mode
from varbesov.dyadic import build_partition
from varbesov.errors import CoverageError, ParameterError, ZeroModeError
from varbesov.fbnorm import FBSpaceSpec, Trajectory
from varbesov.semigroup import (LinearProblem, _phi12, duhamel, duhamel_at, free_flow, propagate, shell_decay_check,
                                solve_linear, time_grid, verify_linear_estimate, young_conjugate)
from varbesov.spectral import Grid
from varbesov.varspace import make_exponent

G1 = Grid(1, 64)
P1 = build_partition(G1)


def test_single_mode_decay_factor():
    u = single_mode(Grid(2, 32), (2, 0))
    out = propagate(u, 0.5, 1.0)
    assert out.coeffs[0, 2, 0] == pytest.approx(math.exp(-1.0), rel=1e-15)
    with pytest.raises(ParameterError):
        propagate(u, -1.0, 1.0)


def test_phi_functions_continuous():
    z = np.array([np.nextafter(0.1, 0.0), 0.1, 1e-3, 5.0])
    p1, p2 = _phi12(z)
    assert abs(p1[0] - p1[1]) < 1e-14 and abs(p2[0] - p2[1]) < 1e-14
    # reference values from the series in exact rationals
    from fractions import Fraction
    zq = Fraction(1, 1000)
    ref1 = sum((-zq) ** k / math.factorial(k + 1) for k in range(12))
    ref2 = sum((-zq) ** k / math.factorial(k + 2) for k in range(12))
    assert abs(p1[2] - float(ref1)) <= 2.3e-16 and abs(p2[2] - float(ref2)) <= 2.3e-16
    assert p2[3] == pytest.approx((math.exp(-5) - 1 + 5) / 25, rel=1e-15)
    assert _phi12(np.array([0.0]))[0][0] == 1.0 and _phi12(np.array([0.0]))[1][0] == 0.5


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
def test_duhamel_constant_forcing(alpha):
    f = single_mode(G1, (5,), amplitude=0.4)
    times = np.linspace(0, 2, 7)
    traj = Trajectory.constant(f, times)
    lam = 5.0**alpha
    for t in (0.3, 1.0, 2.0):
        got = duhamel(traj, t, alpha).coeffs[0, 5]
        assert got == pytest.approx(0.4 * (1 - math.exp(-t * lam)) / lam, rel=1e-12)


def test_duhamel_linear_forcing():
    f = single_mode(G1, (3,))
    times = np.linspace(0, 1, 5)
    traj = Trajectory(G1, times, times[:, None, None] * f.coeffs)
    lam = 3.0**1.5
    out = duhamel_at(traj, times, 1.5)
    want = (lam * times - 1 + np.exp(-lam * times)) / lam**2
    assert np.abs(out[:, 0, 3] - want).max() < 1e-12


def test_duhamel_coverage_and_zero_mode():
    f = single_mode(G1, (3,))
    traj = Trajectory.constant(f, [0.0, 1.0])
    with pytest.raises(CoverageError):
        duhamel(traj, 2.0, 1.0)
    with pytest.raises(CoverageError):
        duhamel(Trajectory.constant(f, [0.5, 1.0]), 1.0, 1.0)
    c = np.zeros((2, 1) + G1.shape, complex)
    c[:, 0, 0] = 1.0
    with pytest.raises(ZeroModeError):
        duhamel(Trajectory(G1, np.array([0.0, 1.0]), c, "free"), 1.0, 1.0)
    with pytest.raises(CoverageError):
        LinearProblem(1.0, f, 2.0, traj)


def test_solve_linear_residual(rng):
    g = Grid(2, 32)
    u0 = random_field(g, rng, k_max=4)
    times = np.linspace(0, 0.5, 201)
    forcing = Trajectory.constant(random_field(g, rng, k_max=4), times)
    sol = solve_linear(LinearProblem(1.5, u0, 0.5, forcing), times)
    assert sol.meta["residual"] <= sol.meta["residual_bound"]
    free = solve_linear(LinearProblem(1.5, u0, 0.5), times)
    assert np.allclose(free.coeffs, free_flow(u0, times, 1.5).coeffs)


def test_shell_decay_bound():
    for alpha in (0.5, 1.0, 1.7, 2.0):
        assert shell_decay_check(P1, alpha, [0.0, 0.1, 1.0, 10.0]).passed


def test_single_shell_linear_constant():
    # u0 sits on |xi| = 3 in shell j = 1: the L^1 part equals (2/3)^alpha (1 - e^{-T 3^alpha}) exactly
    alpha, T = 1.5, 1.0
    u0 = single_mode(G1, (3,))
    times = np.linspace(0, T, 2001)
    reps = verify_linear_estimate(LinearProblem(alpha, u0, T), FBSpaceSpec(0.0, 2.0, 1.0), P1, [1.0, math.inf], times)
    want = (2 / 3) ** alpha * (1 - math.exp(-T * 3**alpha))
    assert reps[0].ratio == pytest.approx(want, rel=1e-5)
    assert reps[0].ratio <= 0.75**-alpha
    assert reps[1].ratio == pytest.approx(1.0, rel=1e-14)
    with pytest.raises(ParameterError):
        verify_linear_estimate(LinearProblem(alpha, u0, T, rho=2.0), FBSpaceSpec(0, 2, 1), P1, [1.0], times)


def test_linear_constant_monotone_in_T(rng):
    g = Grid(2, 32)
    part = build_partition(g)
    u0 = random_field(g, rng)
    times = np.linspace(0, 4, 401)
    spec = FBSpaceSpec(0.0, make_exponent("decay", g, p_inf=2.5, a=0.1), 1.0)
    ratios = []
    for k in (51, 101, 201, 401):
        prob = LinearProblem(1.5, u0, times[k - 1])
        ratios.append(verify_linear_estimate(prob, spec, part, [2.0], times[:k])[0].ratio)
    assert all(b >= a - 1e-12 for a, b in zip(ratios, ratios[1:]))


def test_young_conjugate():
    assert young_conjugate(1.0, 1.0) == 1.0
    assert young_conjugate(2.0, 2.0) == 1.0
    assert math.isinf(young_conjugate(1.0, math.inf))
    assert young_conjugate(2.0, math.inf) == 2.0


def test_time_grid():
    assert np.allclose(time_grid(1.0, 5), np.linspace(0, 1, 5))
    g = time_grid(1.0, 5, "graded", 1e-3)
    assert g[0] == 0 and g[1] == pytest.approx(1e-3) and g[-1] == pytest.approx(1.0)
    with pytest.raises(ParameterError):
        time_grid(1.0, 1)
    with pytest.raises(ParameterError):
        time_grid(1.0, 4, "chebyshev")


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0, 2), st.floats(0, 2), st.floats(0.2, 2.0))
def test_semigroup_property(seed, s, t, alpha):
    u = random_field(G1, np.random.default_rng(seed))
    a = propagate(propagate(u, s, alpha), t, alpha).coeffs
    b = propagate(u, s + t, alpha).coeffs
    assert np.abs(a - b).max() <= 1e-13 * (1 + np.abs(u.coeffs).max())


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-3, 3))
def test_duhamel_linear_in_forcing(seed, c):
    r = np.random.default_rng(seed)
    times = np.linspace(0, 1, 6)
    f = Trajectory(G1, times, np.stack([random_field(G1, r).coeffs for _ in times]))
    a = duhamel_at(f * c, times, 1.2)
    b = c * duhamel_at(f, times, 1.2)
    assert np.abs(a - b).max() <= 1e-13 * (1 + np.abs(b).max())


def test_zero_forcing_and_superposition(rng):
    g = Grid(2, 32)
    times = np.linspace(0, 1, 6)
    f = Trajectory.constant(random_field(g, rng), times)
    assert np.all(duhamel_at(f * 0.0, times, 1.5) == 0)
    u0, v0 = random_field(g, rng), random_field(g, rng)
    both = solve_linear(LinearProblem(1.5, u0 + v0, 1.0, f), times, residual=False)
    parts = (solve_linear(LinearProblem(1.5, u0, 1.0, f), times, residual=False)
             + solve_linear(LinearProblem(1.5, v0, 1.0), times, residual=False))
    assert np.abs(both.coeffs - parts.coeffs).max() <= 1e-13 * np.abs(both.coeffs).max()


def test_free_flow_contraction_at_infinite_rho1(rng):
    g = Grid(2, 32)
    part = build_partition(g)
    spec = FBSpaceSpec(0.3, 2.0, 1.0)
    for _ in range(5):
        prob = LinearProblem(1.5, random_field(g, rng), 10.0)
        (rep,) = verify_linear_estimate(prob, spec, part, [math.inf], time_grid(10.0, 40, "graded", 1e-3))
        assert rep.ratio <= 1 + 1e-10
