"""Fractional heat semigroup, Duhamel integral and the linear estimate verifier.

The forcing is interpolated piecewise linearly in time and integrated
exactly against the exponential kernel: on a step of length ``h`` with
``z = h |xi|^alpha``

    U(t + h) = e^-z U(t) + h phi1(-z) f(t) + h phi2(-z) (f(t + h) - f(t)),

``phi1(-z) = (1 - e^-z) / z`` and ``phi2(-z) = (e^-z - 1 + z) / z^2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dyadic import DyadicPartition
from .errors import CoverageError, ParameterError, ZeroModeError
from .fbnorm import (FBSpaceSpec, Trajectory, _check_resolved, _lr, _time_norm, chemin_lerner_norm,
                     cl_from_amplitudes, fb_norm, shell_amplitudes)
from .reports import EstimateReport
from .spectral import FORCED_ZERO, SpectralField, SymbolSpec, apply_symbol, _check_alpha


def propagate(u0: SpectralField, t: float, alpha: float) -> SpectralField:
    """``e^{-t Lambda^alpha} u0``."""
    if t < 0:
        raise ParameterError(f"propagation time must be >= 0, got {t}")
    return apply_symbol(u0, SymbolSpec.heat(t, alpha))


def _phi12(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``phi1(-z), phi2(-z)`` for ``z >= 0`` without cancellation near 0."""
    z = np.asarray(z, float)
    small = z < 0.1
    zs = np.where(small, 1.0, z)
    em1 = np.expm1(-zs)
    # Taylor series below 0.1, truncated where the next term drops under 1e-20
    p1s, p2s = np.zeros_like(z), np.zeros_like(z)
    term = np.ones_like(z)
    for k in range(13):
        p1s += term / math.factorial(k + 1)
        p2s += term / math.factorial(k + 2)
        term = term * -z
    p1 = np.where(small, p1s, -em1 / zs)
    p2 = np.where(small, p2s, (em1 + zs) / zs**2)
    return p1, p2


def _interp(traj: Trajectory, t: float) -> np.ndarray:
    k = int(np.searchsorted(traj.times, t))
    if k < len(traj) and traj.times[k] == t:
        return traj.coeffs[k]
    t0, t1 = traj.times[k - 1], traj.times[k]
    w = (t - t0) / (t1 - t0)
    return (1 - w) * traj.coeffs[k - 1] + w * traj.coeffs[k]


def duhamel_at(forcing: Trajectory, out_times, alpha: float, zero_mode: str = FORCED_ZERO) -> np.ndarray:
    """``int_0^t e^{-(t-tau) Lambda^alpha} f(tau) dtau`` at each output time; shape ``(K, c, *shape)``."""
    _check_alpha(alpha)
    out_times = np.asarray(out_times, float)
    if out_times.size and (out_times.min() < 0 or out_times.max() > forcing.T * (1 + 1e-14)):
        raise CoverageError(f"forcing covers [{forcing.times[0]}, {forcing.T}], asked for up to {out_times.max()}")
    if forcing.times[0] > 0:
        raise CoverageError("forcing must start at t = 0")
    g = forcing.grid
    f0 = forcing.coeffs[(slice(None), slice(None)) + g.zero_index]
    if zero_mode == FORCED_ZERO and np.any(f0 != 0):
        raise ZeroModeError("forcing has a nonzero zero mode under the forced-zero policy")
    lam = g.xi_norm**alpha
    nodes = np.union1d(forcing.times, out_times)
    nodes = nodes[nodes <= max(out_times.max(initial=0.0), 0.0)]
    U = np.zeros(forcing.coeffs.shape[1:], complex)
    result = np.zeros((out_times.size,) + U.shape, complex)
    where = {t: i for i, t in enumerate(out_times)}
    f_prev = _interp(forcing, nodes[0])
    for idx in np.flatnonzero(out_times == nodes[0]):
        result[idx] = U
    for t_prev, t_next in zip(nodes[:-1], nodes[1:]):
        h = t_next - t_prev
        f_next = _interp(forcing, t_next)
        z = h * lam
        p1, p2 = _phi12(z)
        U = np.exp(-z) * U + h * p1 * f_prev + h * p2 * (f_next - f_prev)
        f_prev = f_next
        if t_next in where:
            for idx in np.flatnonzero(out_times == t_next):
                result[idx] = U
    return result


def duhamel(forcing: Trajectory, t: float, alpha: float, zero_mode: str = FORCED_ZERO) -> SpectralField:
    return SpectralField(forcing.grid, duhamel_at(forcing, [t], alpha, zero_mode)[0], zero_mode)


def duhamel_trajectory(forcing: Trajectory, alpha: float) -> Trajectory:
    """Duhamel integral at every forcing node."""
    return forcing.replace(duhamel_at(forcing, forcing.times, alpha, forcing.zero_mode))


def free_flow(u0: SpectralField, times, alpha: float) -> Trajectory:
    times = np.asarray(times, float)
    lam = u0.grid.xi_norm**alpha
    coeffs = np.exp(-times.reshape((-1,) + (1,) * (u0.grid.dim + 1)) * lam) * u0.coeffs
    return Trajectory(u0.grid, times, coeffs, u0.zero_mode)


@dataclass
class LinearProblem:
    alpha: float
    u0: SpectralField
    T: float
    forcing: Trajectory | None = None
    rho: float = 1.0

    def __post_init__(self):
        _check_alpha(self.alpha)
        if self.forcing is not None and (self.forcing.times[0] > 0 or self.forcing.T < self.T * (1 - 1e-14)):
            raise CoverageError("forcing nodes must cover [0, T]")


def solve_linear(prob: LinearProblem, times, residual: bool = True) -> Trajectory:
    """Exact-in-space solution at the given nodes.

    With ``residual``, ``meta`` carries the residual ``d/dt u + |xi|^alpha u - f``
    at interior nodes (centred differences) and a bound for its
    discretisation error.
    """
    times = np.asarray(times, float)
    traj = free_flow(prob.u0, times, prob.alpha)
    if prob.forcing is not None:
        traj = traj + traj.replace(duhamel_at(prob.forcing, times, prob.alpha, prob.u0.zero_mode))
    res, bound = math.nan, math.nan
    if residual and times.size >= 3:
        res, bound = _residual(traj, prob)
    meta = {"residual": res, "residual_bound": bound}
    return Trajectory(traj.grid, traj.times, traj.coeffs, traj.zero_mode, meta)


def _residual(traj: Trajectory, prob: LinearProblem) -> tuple[float, float]:
    t = traj.times
    lam = traj.grid.xi_norm**prob.alpha
    u = traj.coeffs
    dt = (u[2:] - u[:-2]) / (t[2:] - t[:-2]).reshape((-1,) + (1,) * (u.ndim - 1))
    f = np.zeros_like(u[1:-1]) if prob.forcing is None else np.stack([_interp(prob.forcing, s) for s in t[1:-1]])
    res = dt + lam * u[1:-1] - f
    # centred differences err by h^2/6 |u'''| with u''' = lam^2 (lam u - f) away from forcing kinks,
    # and by at most h/2 |jump of f'| across a kink
    h = float(np.max(np.diff(t)))
    fa = np.zeros_like(u) if prob.forcing is None else np.stack([_interp(prob.forcing, s) for s in t])
    bound = h**2 / 6 * float(np.abs(lam**2 * (lam * u - fa)).max())
    if prob.forcing is not None and len(prob.forcing) >= 3:
        fp = np.diff(prob.forcing.coeffs, axis=0) / np.diff(prob.forcing.times).reshape((-1,) + (1,) * (u.ndim - 1))
        bound += h / 2 * float(np.abs(np.diff(fp, axis=0)).max())
    return float(np.abs(res).max()), float(bound)


def shell_decay_check(part: DyadicPartition, alpha: float, times) -> EstimateReport:
    """``sup_{xi in supp phi_j} e^{-t|xi|^alpha} <= e^{-kappa t 2^{alpha j}}`` with ``kappa = (3/4)^alpha``.

    Reports the largest value of the left side divided by the right side.
    """
    kappa = 0.75**alpha
    r = part.grid.xi_norm.reshape(-1)
    worst = 0.0
    for j, (idx, _) in zip(part.js, part.supports):
        rmin = r[idx].min()
        for t in np.asarray(times, float):
            # ratio = exp(-t (rmin^alpha - kappa 2^{alpha j}))
            worst = max(worst, math.exp(-t * (rmin**alpha - kappa * 2.0 ** (alpha * j))))
    return EstimateReport("shell-decay", worst, 1.0, 1.0 + 1e-15, metadata={"kappa": kappa, "alpha": alpha})


def young_conjugate(rho: float, rho1: float) -> float:
    """``rho2`` with ``1 + 1/rho1 = 1/rho + 1/rho2``."""
    inv = 1 + (0 if math.isinf(rho1) else 1 / rho1) - 1 / rho
    return math.inf if inv == 0 else 1 / inv


def linear_estimate_bound(u0: SpectralField, forcing: Trajectory | None, spec: FBSpaceSpec, part: DyadicPartition,
                          alpha: float, T: float, rho: float, rho1: float) -> float:
    """Right side of the per-shell bound obtained from the kappa shell decay and Young's inequality in time."""
    kappa = 0.75**alpha
    rho2 = young_conjugate(rho, rho1)

    def factor(j, q):
        if math.isinf(q):
            return 1.0
        lam = kappa * 2.0 ** (alpha * j)
        return ((1 - math.exp(-lam * q * T)) / (lam * q)) ** (1 / q)

    a0 = shell_amplitudes(u0.magnitude()[None], spec, part)[:, 0]
    terms = np.array([factor(j, rho1) * 2.0 ** (j * (0 if math.isinf(rho1) else alpha / rho1)) for j in part.js]) * a0
    if forcing is not None:
        af = _time_norm(shell_amplitudes(forcing.magnitudes(), spec, part), forcing.times, rho)
        terms = terms + np.array([factor(j, rho2) * 2.0 ** (j * (0 if math.isinf(rho1) else alpha / rho1)) for j in part.js]) * af
    return _lr(terms, spec.r)


def verify_linear_estimate(prob: LinearProblem, spec: FBSpaceSpec, part: DyadicPartition, rho1_values,
                           times, tolerance: float = math.inf) -> list[EstimateReport]:
    """Empirical constant in the linear estimate for each ``rho1 >= rho``.

    LHS: Chemin-Lerner ``L^rho1`` norm of the solution at regularity
    ``s + alpha/rho1``.  RHS: ``||u0||_s + ||f||`` in ``L^rho`` at
    ``s - alpha + alpha/rho``.
    """
    traj = solve_linear(prob, times, residual=False)
    rhs = fb_norm(prob.u0, spec, part)
    if prob.forcing is not None:
        rhs += chemin_lerner_norm(prob.forcing.truncate(prob.T), prob.rho,
                                  spec.shifted(-prob.alpha + prob.alpha / prob.rho), part)
    mag = traj.magnitudes()
    _check_resolved(mag, part)
    base = shell_amplitudes(mag, spec, part)
    js = np.array(part.js, float)[:, None]
    reports = []
    for rho1 in rho1_values:
        if rho1 < prob.rho:
            raise ParameterError(f"rho1 = {rho1} below rho = {prob.rho}")
        shift = 0.0 if math.isinf(rho1) else prob.alpha / rho1
        lhs, err = cl_from_amplitudes(base * 2.0 ** (js * shift), traj.times, rho1, spec.r, return_error=True)
        reports.append(EstimateReport("linear-estimate", lhs, rhs, tolerance,
                                      metadata={"rho1": rho1, "rho": prob.rho, "T": prob.T, "alpha": prob.alpha,
                                                "quadrature_error": err,
                                                "rho2": young_conjugate(prob.rho, rho1)}))
    return reports


def time_grid(T: float, n: int, kind: str = "uniform", first: float | None = None) -> np.ndarray:
    """``n`` nodes on ``[0, T]``: uniform, or ``0`` followed by geometric nodes from ``first`` to ``T``."""
    if n < 2:
        raise ParameterError("need at least two time nodes")
    if kind == "uniform":
        return np.linspace(0.0, T, n)
    if kind == "graded":
        first = T * 1e-4 if first is None else min(first, T / 2)
        return np.concatenate([[0.0], np.geomspace(first, T, n - 1)])
    raise ParameterError(f"unknown time grid {kind!r}")
