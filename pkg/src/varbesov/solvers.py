"""Nonlinear layer: Leray projection, the bilinear Duhamel operators of the
generalized Navier-Stokes and fractional Keller-Segel systems, solution
spaces, Picard iteration and the scaling / stability checks.

Both systems are written as ``u = y - B(u, u)`` with ``y`` the linear part.
For Navier-Stokes ``B1(u, v) = int e^{-(t-s)Lambda^alpha} P div(u (x) v) ds``
and for Keller-Segel ``B2(u, v) = int e^{-(t-s)Lambda^alpha} div(u grad psi_v) ds``
with ``psi_v = (-Laplace)^-1 v``.  The toy problem ``u = y + c u^2`` on the
real line uses the opposite sign so that its fixed point is the smaller
root of a quadratic.

Solution norms are maxima of Chemin-Lerner norms.  In dimension ``n`` the
critical regularity is ``n + 1 - alpha - n/p`` (Navier-Stokes) or
``n - alpha - n/p`` (Keller-Segel); the two ``L^2`` based parts sit at
``n/2 + 1 - alpha``, ``n/2 + 1`` and ``n/2 - alpha``, ``n/2`` respectively.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .dyadic import DyadicPartition, build_partition
from .errors import ComponentError, ConvergenceError, DimensionError, HypothesisError, ParameterError, ZeroModeError
from .fbnorm import FBSpaceSpec, Trajectory, chemin_lerner_norm, fb_norm
from .reports import EstimateReport, deviation_report
from .semigroup import _interp, _phi12, duhamel_at, free_flow
from .spectral import FORCED_ZERO, Grid, SpectralField, SymbolSpec, apply_symbol, leray_matrix, to_spectral, to_physical
from .varspace import ExponentField

NSE = "nse"
KS = "keller_segel"
TOY = "scalar_toy"

CONVERGED = "converged"
MAX_ITER = "max-iter"
SMALLNESS = "smallness-violation"
BLOW_UP = "blow-up-suspected"

BLOW_UP_FACTOR = 1e3


# ---------------------------------------------------------------- operators

def leray_project(u: SpectralField) -> SpectralField:
    if u.components != u.grid.dim:
        raise ComponentError(f"Leray projection needs a vector field with {u.grid.dim} components")
    if u.zero_mode != FORCED_ZERO:
        raise ZeroModeError("Leray projection is applied to fields with a forced-zero mean")
    return apply_symbol(u, SymbolSpec.leray())


def _axes(grid: Grid, lead: int) -> tuple[int, ...]:
    return tuple(range(lead, lead + grid.dim))


def _phys(c: np.ndarray, grid: Grid) -> np.ndarray:
    lead = c.ndim - grid.dim
    return np.fft.ifftn(c / grid._transform_factor, axes=_axes(grid, lead)).real


def _spec(a: np.ndarray, grid: Grid) -> np.ndarray:
    lead = a.ndim - grid.dim
    c = np.fft.fftn(a, axes=_axes(grid, lead)) * grid._transform_factor
    c *= grid.dealias_mask
    c[(Ellipsis,) + grid.zero_index] = 0
    return c


def _check_pair(u: Trajectory, v: Trajectory, components: int) -> None:
    if u.grid != v.grid:
        raise DimensionError("trajectories live on different grids")
    if u.times.shape != v.times.shape or np.any(u.times != v.times):
        raise DimensionError("trajectories use different time nodes")
    if u.components != components or v.components != components:
        raise ComponentError(f"expected {components} components")


def nse_flux(u: np.ndarray, v: np.ndarray, grid: Grid) -> np.ndarray:
    """``P div(u (x) v)`` for coefficient stacks ``(M, d, *shape)``; component ``i`` is ``sum_j d_j(u_j v_i)``."""
    up, vp = _phys(u, grid), _phys(v, grid)
    tensor = _spec(vp[:, :, None] * up[:, None, :], grid)  # [m, i, j] = v_i u_j
    flux = np.einsum("j...,mij...->mi...", 1j * grid.xi, tensor)
    return np.einsum("ij...,mj...->mi...", leray_matrix(grid), flux)


def _grad_potential(c: np.ndarray, grid: Grid) -> np.ndarray:
    """``grad (-Laplace)^-1`` of scalar stacks ``(M, 1, *shape)``, returned in physical space ``(M, d, *shape)``."""
    r2 = grid.xi_norm**2
    inv = np.divide(1.0, r2, out=np.zeros_like(r2), where=r2 > 0)
    g = 1j * grid.xi * inv * ~grid.nyquist_mask
    return _phys(c[:, 0][:, None] * g[None], grid)


def ks_flux(u: np.ndarray, v: np.ndarray, grid: Grid, form: str = "direct") -> np.ndarray:
    """Keller-Segel nonlinearity for scalar stacks ``(M, 1, *shape)``.

    ``direct``: ``div(u grad psi_v)``.  ``symmetric``:
    ``-div div(grad psi_u (x) grad psi_v - <grad psi_u, grad psi_v> I / 2)``, which is
    the symmetrisation of the direct form and equals it when ``u = v``.
    """
    if form == "direct":
        q = _spec(_phys(u, grid) * _grad_potential(v, grid), grid)
        return np.einsum("j...,mj...->m...", 1j * grid.xi, q)[:, None]
    if form == "symmetric":
        a, b = _grad_potential(u, grid), _grad_potential(v, grid)
        s = a[:, :, None] * b[:, None, :]
        dot = (a * b).sum(axis=1)
        for i in range(grid.dim):
            s[:, i, i] -= 0.5 * dot
        sh = _spec(s, grid)
        return np.einsum("i...,j...,mij...->m...", grid.xi, grid.xi, sh)[:, None]
    raise ParameterError(f"unknown Keller-Segel form {form!r}")


def _check_ks(u: Trajectory) -> None:
    if u.zero_mode != FORCED_ZERO:
        raise ZeroModeError("Keller-Segel needs mean-zero data under the forced-zero policy")


def nse_bilinear_trajectory(u: Trajectory, v: Trajectory, alpha: float) -> Trajectory:
    _check_pair(u, v, u.grid.dim)
    forcing = u.replace(nse_flux(u.coeffs, v.coeffs, u.grid))
    return u.replace(duhamel_at(forcing, u.times, alpha))


def ks_bilinear_trajectory(u: Trajectory, v: Trajectory, alpha: float, form: str = "direct") -> Trajectory:
    _check_pair(u, v, 1)
    _check_ks(u)
    _check_ks(v)
    forcing = u.replace(ks_flux(u.coeffs, v.coeffs, u.grid, form))
    return u.replace(duhamel_at(forcing, u.times, alpha))


def _at(traj: Trajectory, t: float) -> SpectralField:
    hits = np.flatnonzero(np.isclose(traj.times, t, rtol=0, atol=1e-14 * max(1.0, abs(t))))
    if hits.size == 0:
        raise ParameterError(f"t = {t} is not a trajectory node")
    return traj.snapshot(int(hits[0]))


def nse_bilinear(u: Trajectory, v: Trajectory, t: float, alpha: float) -> SpectralField:
    return _at(nse_bilinear_trajectory(u.truncate(t), v.truncate(t), alpha), t)


def ks_bilinear(u: Trajectory, v: Trajectory, t: float, alpha: float, form: str = "direct") -> SpectralField:
    return _at(ks_bilinear_trajectory(u.truncate(t), v.truncate(t), alpha, form), t)


def max_divergence(traj: Trajectory) -> float:
    """Largest ``|xi . u^(xi)|`` relative to the largest coefficient."""
    g = traj.grid
    div = np.abs(np.einsum("j...,mj...->m...", g.xi, traj.coeffs)).max()
    scale = np.abs(traj.coeffs).max()
    return float(div / scale) if scale > 0 else 0.0


# ---------------------------------------------------------------- spaces

def theorem_p_plus(alpha: float) -> float:
    """Upper bound ``6 / (5 - 2 alpha)`` on ``p+`` in the well-posedness hypotheses."""
    return 6.0 / (5.0 - 2.0 * alpha)


def hypothesis_violations(alpha: float, p) -> list[str]:
    """Reasons why ``(alpha, p)`` falls outside ``1 < alpha <= 2``, ``2 <= p- <= p+ <= 6/(5 - 2 alpha)``."""
    out = []
    if not 1 < alpha <= 2:
        out.append(f"alpha = {alpha} outside (1, 2]")
    lo, hi = (p.p_minus, p.p_plus) if isinstance(p, ExponentField) else (float(p), float(p))
    if lo < 2:
        out.append(f"p- = {lo} below 2")
    if alpha < 2.5 and hi > theorem_p_plus(alpha) * (1 + 1e-12):
        out.append(f"p+ = {hi} above 6/(5 - 2 alpha) = {theorem_p_plus(alpha)}")
    return out


def critical_regularity(system: str, dim: int, alpha: float, p):
    pv = p.values if isinstance(p, ExponentField) else float(p)
    if system == NSE:
        return dim + 1 - alpha - dim / pv
    if system == KS:
        return dim - alpha - dim / pv
    raise ParameterError(f"no critical space for {system!r}")


def critical_spec(system: str, dim: int, alpha: float, p) -> FBSpaceSpec:
    return FBSpaceSpec(critical_regularity(system, dim, alpha, p), p, 1.0)


def energy_regularities(system: str, dim: int, alpha: float) -> tuple[float, float]:
    """Regularities of the ``L^inf_t`` and ``L^1_t`` parts built on ``FB_{2,1}``."""
    base = dim / 2 + (1.0 if system == NSE else 0.0)
    return base - alpha, base


@dataclass(frozen=True)
class SolutionSpace:
    """Maximum of Chemin-Lerner norms ``(label, rho, spec)``."""

    name: str
    parts: tuple

    def norms(self, traj: Trajectory, part: DyadicPartition) -> dict[str, float]:
        return {label: chemin_lerner_norm(traj, rho, spec, part) for label, rho, spec in self.parts}

    def norm(self, traj: Trajectory, part: DyadicPartition) -> float:
        return max(self.norms(traj, part).values())


def solution_space(system: str, dim: int, alpha: float, p, rho: float = 2.0) -> SolutionSpace:
    crit = critical_spec(system, dim, alpha, p)
    s_inf, s_one = energy_regularities(system, dim, alpha)
    shift = 0.0 if math.isinf(rho) else alpha / rho
    return SolutionSpace("X" if system == NSE else "Y", (
        ("critical", rho, crit.shifted(shift)),
        ("energy-inf", math.inf, FBSpaceSpec(s_inf, 2.0, 1.0)),
        ("energy-1", 1.0, FBSpaceSpec(s_one, 2.0, 1.0)),
    ))


def data_norm(system: str, u0: SpectralField, forcing: Trajectory | None, alpha: float, p,
              part: DyadicPartition) -> float:
    """``||u0||_crit + ||f||_{L^1(crit)} + ||f||_{L^1(FB^{s_inf}_{2,1})}``, the smallness quantity."""
    crit = critical_spec(system, u0.grid.dim, alpha, p)
    total = fb_norm(u0, crit, part)
    if forcing is not None:
        s_inf, _ = energy_regularities(system, u0.grid.dim, alpha)
        total += chemin_lerner_norm(forcing, 1.0, crit, part)
        total += chemin_lerner_norm(forcing, 1.0, FBSpaceSpec(s_inf, 2.0, 1.0), part)
    return total


# ---------------------------------------------------------------- problems

@dataclass
class FlowProblem:
    """Navier-Stokes (``system = "nse"``) or Keller-Segel (``"keller_segel"``) on fixed time nodes."""

    system: str
    alpha: float
    u0: SpectralField
    times: np.ndarray
    p: float | ExponentField = 2.0
    rho: float = 2.0
    forcing: Trajectory | None = None
    form: str = "direct"

    def __post_init__(self):
        if self.system not in (NSE, KS):
            raise ParameterError(f"unknown system {self.system!r}")
        if not 0 < self.alpha <= 2:
            raise ParameterError(f"alpha must lie in (0, 2], got {self.alpha}")
        want = self.u0.grid.dim if self.system == NSE else 1
        if self.u0.components != want:
            raise ComponentError(f"{self.system} data needs {want} components")
        if self.u0.zero_mode != FORCED_ZERO:
            raise ZeroModeError("data must use the forced-zero policy")
        self.times = np.asarray(self.times, float)

    @property
    def grid(self) -> Grid:
        return self.u0.grid

    def violations(self) -> list[str]:
        return hypothesis_violations(self.alpha, self.p)

    def space(self) -> SolutionSpace:
        return solution_space(self.system, self.grid.dim, self.alpha, self.p, self.rho)

    def linear_part(self) -> Trajectory:
        y = free_flow(self.u0, self.times, self.alpha)
        if self.forcing is not None:
            f = self.forcing
            if self.system == NSE:
                f = f.replace(np.einsum("ij...,mj...->mi...", leray_matrix(self.grid), f.coeffs))
            y = y + y.replace(duhamel_at(f, self.times, self.alpha))
        return y

    def bilinear(self, u: Trajectory, v: Trajectory) -> Trajectory:
        if self.system == NSE:
            return nse_bilinear_trajectory(u, v, self.alpha)
        return ks_bilinear_trajectory(u, v, self.alpha, self.form)

    sign = -1.0

    def data_norm(self, part: DyadicPartition) -> float:
        return data_norm(self.system, self.u0, self.forcing, self.alpha, self.p, part)

    def with_data(self, u0: SpectralField, forcing: Trajectory | None = None) -> "FlowProblem":
        return FlowProblem(self.system, self.alpha, u0, self.times, self.p, self.rho, forcing, self.form)


@dataclass
class ScalarToy:
    """``u = y + c u^2`` on the real line."""

    y: float
    c: float = 1.0
    system: str = TOY
    sign = 1.0

    def linear_part(self) -> float:
        return float(self.y)

    def bilinear(self, u: float, v: float) -> float:
        return self.c * u * v

    def violations(self) -> list[str]:
        return []

    def exact(self) -> float:
        """Smaller root ``(1 - sqrt(1 - 4 c y)) / (2 c)``; NaN without a real root."""
        disc = 1 - 4 * self.c * self.y
        if disc < 0:
            return math.nan
        if self.c == 0:
            return float(self.y)
        return 2 * self.y / (1 + math.sqrt(disc))


class _ToySpace:
    name = "R"

    def norm(self, u, part=None) -> float:
        return abs(float(u))

    def norms(self, u, part=None) -> dict[str, float]:
        return {"abs": self.norm(u)}


# ---------------------------------------------------------------- fixed point

@dataclass
class FixedPointConfig:
    """``space`` defaults to the problem's own solution space; ``c_emp`` is the measured bilinear constant."""

    c_emp: float
    max_iter: int = 50
    tolerance: float = 1e-10
    relative: bool = True
    space: SolutionSpace | None = None

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ParameterError("tolerance must be positive")
        if self.max_iter < 1:
            raise ParameterError("max_iter must be at least 1")
        if not self.c_emp > 0:
            raise ParameterError("bilinear constant must be positive")


@dataclass
class FixedPointDiagnostics:
    x_norms: list = field(default_factory=list)
    differences: list = field(default_factory=list)
    ratios: list = field(default_factory=list)
    divergence: list = field(default_factory=list)
    eta: float = 0.0
    c_emp: float = math.nan
    margin: float = math.nan
    converged: bool = False
    smallness_violated: bool = False
    verdict: str = MAX_ITER
    iterations: int = 0
    ball_bound: float = math.nan
    within_ball: bool = False
    hypothesis_violations: list = field(default_factory=list)

    def to_rows(self) -> list[dict]:
        rows = []
        for k, x in enumerate(self.x_norms):
            rows.append({"iterate": k, "x_norm": x,
                         "difference": self.differences[k - 1] if k >= 1 else math.nan,
                         "ratio": self.ratios[k - 2] if k >= 2 else math.nan})
        return rows

    def summary(self) -> dict:
        return {"eta": self.eta, "c_emp": self.c_emp, "margin": self.margin, "converged": self.converged,
                "verdict": self.verdict, "iterations": self.iterations, "ball_bound": self.ball_bound,
                "within_ball": self.within_ball, "smallness_violated": self.smallness_violated,
                "final_x_norm": self.x_norms[-1] if self.x_norms else math.nan,
                "hypothesis_violations": list(self.hypothesis_violations)}


def picard_solve(problem, cfg: FixedPointConfig, part: DyadicPartition | None = None):
    """Successive approximations ``u_0 = y``, ``u_{n+1} = y + sign B(u_n, u_n)``.

    The run stops when the difference of successive iterates in the solution
    norm drops to ``tolerance`` (times ``eta`` when ``relative``), when
    ``max_iter`` is hit, or when an iterate is NaN or exceeds ``1e3 * eta``
    (blow-up suspected).  An iterate above ``10 / (4 c_emp)`` marks the run as
    violating smallness without stopping it.
    """
    toy = isinstance(problem, ScalarToy)
    if toy:
        space = _ToySpace()
    else:
        space = cfg.space or problem.space()
        part = part or build_partition(problem.grid)
    diag = FixedPointDiagnostics(c_emp=cfg.c_emp, hypothesis_violations=problem.violations())
    y = problem.linear_part()
    eta = space.norm(y, part)
    diag.eta = eta
    diag.margin = 4 * cfg.c_emp * eta
    diag.ball_bound = 2 * eta
    guard = 10.0 / (4 * cfg.c_emp)
    tol = cfg.tolerance * (eta if cfg.relative else 1.0)
    u = y
    diag.x_norms.append(eta)
    if not toy and problem.system == NSE:
        diag.divergence.append(max_divergence(u))
    if eta == 0:
        diag.converged, diag.verdict = True, CONVERGED
        diag.within_ball = True
        return u, diag
    for k in range(1, cfg.max_iter + 1):
        new = y + problem.bilinear(u, u) * problem.sign
        xn = space.norm(new, part)
        diff = space.norm(new - u, part)
        diag.iterations = k
        diag.x_norms.append(xn)
        diag.differences.append(diff)
        if len(diag.differences) >= 2 and diag.differences[-2] > 0:
            diag.ratios.append(diff / diag.differences[-2])
        if not toy and problem.system == NSE:
            diag.divergence.append(max_divergence(new))
        u = new
        if not math.isfinite(xn) or xn > BLOW_UP_FACTOR * eta:
            diag.verdict = BLOW_UP
            diag.smallness_violated = diag.smallness_violated or not math.isfinite(xn) or xn > guard
            return u, diag
        if xn > guard:
            diag.smallness_violated = True
        if diff <= tol:
            diag.converged, diag.verdict = True, CONVERGED
            break
    if not diag.converged:
        diag.verdict = SMALLNESS if diag.smallness_violated else MAX_ITER
    diag.within_ball = diag.x_norms[-1] <= diag.ball_bound * (1 + 1e-6)
    return u, diag


def continuous_dependence_check(problem, problem_tilde, cfg: FixedPointConfig,
                                part: DyadicPartition | None = None) -> EstimateReport:
    """``||u - u~||_X / ||y - y~||_X`` against ``1.1 / (1 - 4 eta c_emp)`` with ``eta`` the larger data norm."""
    u, d1 = picard_solve(problem, cfg, part)
    ut, d2 = picard_solve(problem_tilde, cfg, part)
    if not (d1.converged and d2.converged):
        raise ConvergenceError(f"fixed-point solve failed: {d1.verdict}, {d2.verdict}")
    space = _ToySpace() if isinstance(problem, ScalarToy) else (cfg.space or problem.space())
    if not isinstance(problem, ScalarToy):
        part = part or build_partition(problem.grid)
    eta = max(d1.eta, d2.eta)
    margin = 4 * eta * cfg.c_emp
    bound = 1.1 / (1 - margin) if margin < 1 else math.inf
    lhs = space.norm(u - ut, part)
    rhs = space.norm(problem.linear_part() - problem_tilde.linear_part(), part)
    return EstimateReport("continuous-dependence", lhs, rhs, bound,
                          metadata={"eta": eta, "c_emp": cfg.c_emp, "margin": margin})


# ---------------------------------------------------------------- scaling

SCALING_EXPONENT = {NSE: lambda alpha: alpha - 1.0, KS: lambda alpha: alpha}


def rescale(u0: SpectralField, lam: float, system: str, alpha: float) -> SpectralField:
    """``lam^a u0(lam x)`` on the companion grid with half-width ``L / lam``.

    The companion grid samples ``u0(lam x)`` at exactly the original sample
    values, so only the amplitude changes.
    """
    a = SCALING_EXPONENT[system](alpha)
    g = u0.grid
    companion = Grid(g.dim, g.n, g.L / lam)
    samples = to_physical(u0).reshape((u0.components,) + g.shape)
    return to_spectral(lam**a * samples, companion, u0.zero_mode)


def critical_scaling_check(system: str, u0: SpectralField, alpha: float, p: float, lam: float = 2.0,
                           tolerance: float = 1e-8) -> EstimateReport:
    """Critical norm of the rescaled data against the original; reports ``|ratio - 1|``."""
    if isinstance(p, ExponentField):
        raise ParameterError("scale invariance is only checked for constant p")
    k = math.log2(lam) if lam > 0 else math.nan
    if not (math.isfinite(k) and k == round(k)):
        raise ParameterError(f"lambda must be a power of 2, got {lam}")
    spec = critical_spec(system, u0.grid.dim, alpha, p)
    n0 = fb_norm(u0, spec, build_partition(u0.grid))
    ul = rescale(u0, lam, system, alpha)
    n1 = fb_norm(ul, spec, build_partition(ul.grid))
    ratio = n1 / n0 if n0 > 0 else (1.0 if n1 == 0 else math.inf)
    return deviation_report("critical-scaling", abs(ratio - 1.0), tolerance, system=system, alpha=alpha,
                            p=float(p), lam=lam, norm=n0, rescaled_norm=n1, ratio=ratio)


# ---------------------------------------------------------------- bilinear estimates

@dataclass
class BilinearEstimate:
    reports: list
    c_emp: float
    c_lin: float

    def max_ratio(self, label: str) -> float:
        vals = [r.ratio for r in self.reports if r.label == label]
        return max(vals, default=0.0)


def verify_bilinear_estimate(problem: FlowProblem, samples, part: DyadicPartition | None = None,
                             forcings=(), strict: bool = True) -> BilinearEstimate:
    """Empirical constants of the bilinear and linear estimates.

    ``samples`` are trajectories on ``problem.times``; each gives the ratio
    ``||B(u, u)||_X / ||u||_X^2`` and, for consecutive pairs, the polarised
    ``||B(u, v)||_X / (||u||_X ||v||_X)``.  The linear ratios use the
    samples' initial values as data and ``forcings`` as forcing terms.
    """
    if strict and problem.violations():
        raise HypothesisError("; ".join(problem.violations()))
    part = part or build_partition(problem.grid)
    space = problem.space()
    reports = []
    samples = list(samples)
    meta = {"system": problem.system, "alpha": problem.alpha, "N": problem.grid.n, "dim": problem.grid.dim}
    norms = [space.norm(u, part) for u in samples]
    for k, (u, nu) in enumerate(zip(samples, norms)):
        b = space.norm(problem.bilinear(u, u), part)
        reports.append(EstimateReport("bilinear", b, nu**2, math.inf, metadata={**meta, "sample": k}))
        if k >= 1:
            v, nv = samples[k - 1], norms[k - 1]
            b = space.norm(problem.bilinear(u, v), part)
            reports.append(EstimateReport("bilinear-polarised", b, nu * nv, math.inf, metadata={**meta, "sample": k}))
    crit = critical_spec(problem.system, problem.grid.dim, problem.alpha, problem.p)
    for k, u in enumerate(samples):
        u0 = u.snapshot(0)
        y = free_flow(u0, problem.times, problem.alpha)
        reports.append(EstimateReport("linear-data", space.norm(y, part), fb_norm(u0, crit, part), math.inf,
                                      metadata={**meta, "sample": k}))
    for k, f in enumerate(forcings):
        zero = SpectralField(problem.grid, np.zeros_like(f.coeffs[0]))
        prob = problem.with_data(zero, f)
        reports.append(EstimateReport("linear-forcing", space.norm(prob.linear_part(), part),
                                      prob.data_norm(part), math.inf, metadata={**meta, "sample": k}))
    c_emp = max([r.ratio for r in reports if r.label.startswith("bilinear") and math.isfinite(r.ratio)], default=0.0)
    c_lin = max([r.ratio for r in reports if r.label.startswith("linear") and math.isfinite(r.ratio)], default=0.0)
    return BilinearEstimate(reports, c_emp, c_lin)


# ---------------------------------------------------------------- cross-check and manifest

def march(problem: FlowProblem, substeps: int = 8) -> Trajectory:
    """Independent time-marcher (second-order exponential Runge-Kutta) on the problem's nodes.

    Each node interval is split into ``substeps`` equal steps; used to
    cross-check converged Picard trajectories.
    """
    g = problem.grid
    lam = g.xi_norm**problem.alpha

    def rhs(c):
        c = c[None]
        if problem.system == NSE:
            return -nse_flux(c, c, g)[0]
        return -ks_flux(c, c, g, problem.form)[0]

    forcing = None
    if problem.forcing is not None:
        f = problem.forcing
        if problem.system == NSE:
            f = f.replace(np.einsum("ij...,mj...->mi...", leray_matrix(g), f.coeffs))
        forcing = f

    def force(t):
        return 0.0 if forcing is None else _interp(forcing, t)

    times = problem.times
    u = np.array(problem.u0.coeffs)
    out = [u.copy()]
    for t0, t1 in zip(times[:-1], times[1:]):
        h = (t1 - t0) / substeps
        z = h * lam
        e = np.exp(-z)
        p1, p2 = _phi12(z)
        t = t0
        for _ in range(substeps):
            n0 = rhs(u) + force(t)
            a = e * u + h * p1 * n0
            n1 = rhs(a) + force(t + h)
            u = a + h * p2 * (n1 - n0)
            t += h
        out.append(u.copy())
    return Trajectory(g, times, np.stack(out), FORCED_ZERO)


def run_manifest(problem, cfg: FixedPointConfig, seeds=None, generators=None) -> str:
    """JSON manifest describing a solve."""
    info = {"system": problem.system, "config": {"c_emp": cfg.c_emp, "max_iter": cfg.max_iter,
                                                  "tolerance": cfg.tolerance, "relative": cfg.relative}}
    if isinstance(problem, FlowProblem):
        g = problem.grid
        p = problem.p.to_json() if isinstance(problem.p, ExponentField) else {"kind": "constant", "p0": problem.p}
        info.update({"alpha": problem.alpha, "grid": {"dim": g.dim, "N": g.n, "L": g.L},
                     "times": problem.times.tolist(), "rho": problem.rho, "exponent": p, "form": problem.form})
    else:
        info.update({"y": problem.y, "c": problem.c})
    info["seeds"] = seeds or {}
    info["generators"] = generators or {}
    return json.dumps(info, sort_keys=True, indent=2)
