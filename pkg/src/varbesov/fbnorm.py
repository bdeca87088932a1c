"""Fourier-Besov and Chemin-Lerner norms, and the lemma verifiers built on them.

Shell amplitudes are ``a_j = || 2^(j s(xi)) phi_j(xi) |f^(xi)| ||_{L^p(.)_xi}``
with the lattice weight ``L^-d``; the Fourier-Besov norm is the ``l^r`` norm
of ``(a_j)``.  Vector fields use the pointwise Euclidean length of the
coefficients.  Chemin-Lerner norms take the time ``L^rho`` norm of each
``a_j(t)`` (composite trapezoid on the trajectory nodes, max for
``rho = inf``) before the ``l^r`` sum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .dyadic import DyadicPartition
from .errors import DimensionError, ParameterError, QuadratureError, ResolutionError
from .reports import EstimateReport
from .spectral import FORCED_ZERO, Grid, SpectralField, gradient, product
from .varspace import ExponentField, luxemburg_rows

LEAK_TOL = 1e-10


@dataclass(frozen=True)
class FBSpaceSpec:
    """Regularity ``s`` (number or lattice array), integrability ``p`` (number in ``[1, inf]``
    or ExponentField), summability ``r`` in ``[1, inf]``."""

    s: float | np.ndarray
    p: float | ExponentField
    r: float = 1.0

    def __post_init__(self):
        if not self.r >= 1:
            raise ParameterError(f"summability r must be >= 1, got {self.r}")
        if not isinstance(self.p, ExponentField) and not self.p >= 1:
            raise ParameterError(f"integrability p must be >= 1, got {self.p}")

    @property
    def p_values(self):
        return self.p.values if isinstance(self.p, ExponentField) else float(self.p)

    @property
    def constant(self) -> bool:
        return np.ndim(self.s) == 0 and not isinstance(self.p, ExponentField)

    def shifted(self, ds) -> "FBSpaceSpec":
        return FBSpaceSpec(self.s + ds, self.p, self.r)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Fields at increasing time nodes; ``coeffs`` has shape ``(M, components, *grid.shape)``."""

    grid: Grid
    times: np.ndarray
    coeffs: np.ndarray
    zero_mode: str = FORCED_ZERO
    meta: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        t = np.array(self.times, float)
        c = np.array(self.coeffs, complex)
        if t.ndim != 1 or t.size == 0:
            raise ParameterError("trajectory needs at least one node")
        if np.any(np.diff(t) <= 0):
            raise ParameterError("time nodes must increase strictly")
        if c.ndim != self.grid.dim + 2 or c.shape[0] != t.size or c.shape[2:] != self.grid.shape:
            raise DimensionError(f"trajectory coefficients {c.shape} do not fit {t.size} nodes on {self.grid.shape}")
        t.flags.writeable = False
        c.flags.writeable = False
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_fields(cls, times, fields) -> "Trajectory":
        fields = list(fields)
        return cls(fields[0].grid, times, np.stack([f.coeffs for f in fields]), fields[0].zero_mode)

    @classmethod
    def constant(cls, field: SpectralField, times) -> "Trajectory":
        t = np.asarray(times, float)
        return cls(field.grid, t, np.broadcast_to(field.coeffs, (t.size,) + field.coeffs.shape), field.zero_mode)

    @property
    def components(self) -> int:
        return self.coeffs.shape[1]

    @property
    def T(self) -> float:
        return float(self.times[-1])

    def __len__(self) -> int:
        return self.times.size

    def snapshot(self, k: int) -> SpectralField:
        return SpectralField(self.grid, self.coeffs[k], self.zero_mode)

    @property
    def snapshots(self) -> list[SpectralField]:
        return [self.snapshot(k) for k in range(len(self))]

    def replace(self, coeffs) -> "Trajectory":
        return Trajectory(self.grid, self.times, coeffs, self.zero_mode)

    def truncate(self, T: float) -> "Trajectory":
        keep = self.times <= T * (1 + 1e-14)
        return Trajectory(self.grid, self.times[keep], self.coeffs[keep], self.zero_mode)

    def subsample(self, step: int = 2) -> "Trajectory":
        return Trajectory(self.grid, self.times[::step], self.coeffs[::step], self.zero_mode)

    def magnitudes(self) -> np.ndarray:
        c = self.coeffs
        if c.shape[1] == 1:
            return np.abs(c[:, 0])
        return np.sqrt((np.abs(c) ** 2).sum(axis=1))

    def __add__(self, other: "Trajectory") -> "Trajectory":
        return self.replace(self.coeffs + other.coeffs)

    def __sub__(self, other: "Trajectory") -> "Trajectory":
        return self.replace(self.coeffs - other.coeffs)

    def __mul__(self, scalar: float) -> "Trajectory":
        return self.replace(self.coeffs * scalar)

    __rmul__ = __mul__


def _check_resolved(mag: np.ndarray, part: DyadicPartition) -> None:
    """Raise when energy sits where the finite partition does not sum to one."""
    g = part.grid
    flat = (mag**2).reshape(mag.shape[0], -1)
    total = flat.sum()
    if total == 0:
        return
    miss = (1.0 - part.mask_sum).reshape(-1)
    miss[np.ravel_multi_index(g.zero_index, g.shape)] = 0.0
    leak = (flat * np.abs(miss) ** 2).sum()
    if leak > LEAK_TOL * total:
        raise ResolutionError(f"fraction {leak / total:.3e} of the energy lies outside the dyadic range")


def shell_amplitudes(mag: np.ndarray, spec: FBSpaceSpec, part: DyadicPartition) -> np.ndarray:
    """``a_j(t)`` for magnitudes of shape ``(M, *shape)``; returns ``(n_shells, M)``."""
    mag = np.asarray(mag, float)
    M = mag.shape[0]
    flat = mag.reshape(M, -1)
    s = spec.s
    s_arr = None if np.ndim(s) == 0 else np.asarray(s, float).reshape(-1)
    p = spec.p_values
    p_arr = None if np.ndim(p) == 0 else np.asarray(p).reshape(-1)
    w = part.grid.cell_volume
    out = np.zeros((len(part.js), M))
    for k, (j, (idx, vals)) in enumerate(zip(part.js, part.supports)):
        rows = flat[:, idx] * vals
        if s_arr is not None:
            rows = rows * 2.0 ** (j * s_arr[idx])
        pj = p if p_arr is None else p_arr[idx]
        a = luxemburg_rows(rows, pj, w)
        if s_arr is None:
            a = a * 2.0 ** (j * float(s))
        out[k] = a
    return out


def _lr(a: np.ndarray, r: float) -> float:
    if math.isinf(r):
        return float(a.max(initial=0.0))
    return float((a**r).sum() ** (1.0 / r))


def fb_norm(field: SpectralField, spec: FBSpaceSpec, part: DyadicPartition) -> float:
    """Homogeneous Fourier-Besov norm with possibly variable ``s`` and ``p``."""
    mag = field.magnitude()[None]
    _check_resolved(mag, part)
    return _lr(shell_amplitudes(mag, spec, part)[:, 0], spec.r)


def _time_norm(a: np.ndarray, times: np.ndarray, rho: float) -> np.ndarray:
    if math.isinf(rho):
        return a.max(axis=-1)
    if times.size < 2:
        raise QuadratureError("a finite time exponent needs at least two nodes")
    return np.trapezoid(a**rho, times, axis=-1) ** (1.0 / rho)


def chemin_lerner_norm(traj: Trajectory, rho: float, spec: FBSpaceSpec, part: DyadicPartition,
                       return_error: bool = False):
    """Chemin-Lerner norm over ``[0, T]`` on the trajectory's nodes.

    With ``return_error`` the difference to the same quadrature on every
    other node is returned too (a Richardson-style error indicator; 0 when
    ``rho = inf`` or there are fewer than three nodes).
    """
    if rho < 1:
        raise ParameterError("time exponent must be >= 1")
    if not math.isinf(rho) and len(traj) < 2:
        raise QuadratureError("a finite time exponent needs at least two nodes")
    mag = traj.magnitudes()
    _check_resolved(mag, part)
    return cl_from_amplitudes(shell_amplitudes(mag, spec, part), traj.times, rho, spec.r, return_error)


def cl_from_amplitudes(a: np.ndarray, times: np.ndarray, rho: float, r: float, return_error: bool = False):
    """Chemin-Lerner norm from shell amplitudes ``a`` of shape ``(n_shells, M)``."""
    value = _lr(_time_norm(a, times, rho), r)
    if not return_error:
        return value
    err = 0.0
    if not math.isinf(rho) and times.size >= 3:
        t2, a2 = times[::2], a[:, ::2]
        if t2[-1] != times[-1]:
            t2 = np.append(t2, times[-1])
            a2 = np.concatenate([a2, a[:, -1:]], axis=1)
        err = abs(value - _lr(_time_norm(a2, t2, rho), r))
    return value, err


def embedding_check(field: SpectralField, spec_hi: FBSpaceSpec, spec_lo: FBSpaceSpec, part: DyadicPartition,
                    tolerance: float = math.inf) -> EstimateReport:
    """``||u||_lo / ||u||_hi`` for the embedding of ``FB^s_{p2,r2}`` into ``FB^{s - d(1/p1 - 1/p2)}_{p1,r1}``."""
    if not (spec_hi.constant and spec_lo.constant):
        raise ParameterError("embedding check takes constant exponents")
    p1, p2, r1, r2 = spec_lo.p, spec_hi.p, spec_lo.r, spec_hi.r
    d = part.grid.dim
    if not (p1 <= p2 and r1 <= r2):
        raise ParameterError("need p1 <= p2 and r1 <= r2")
    expected = spec_hi.s - d * (1.0 / p1 - 1.0 / p2)
    if abs(spec_lo.s - expected) > 1e-12:
        raise ParameterError(f"target regularity must be {expected}")
    return EstimateReport("embedding", fb_norm(field, spec_lo, part), fb_norm(field, spec_hi, part), tolerance,
                          metadata={"p1": p1, "p2": p2, "r1": r1, "r2": r2})


def interpolation_check(field: SpectralField, s1: float, s2: float, theta: float, p, r: float,
                        part: DyadicPartition, tolerance: float = 1 + 1e-10) -> EstimateReport:
    """``||u||_{s1 th + s2 (1 - th)} <= ||u||_{s1}^th ||u||_{s2}^(1-th)``."""
    if not s1 < s2:
        raise ParameterError("need s1 < s2")
    if not 0 < theta < 1:
        raise ParameterError("theta must lie in (0, 1)")
    lhs = fb_norm(field, FBSpaceSpec(s1 * theta + s2 * (1 - theta), p, r), part)
    rhs = fb_norm(field, FBSpaceSpec(s1, p, r), part) ** theta * fb_norm(field, FBSpaceSpec(s2, p, r), part) ** (1 - theta)
    return EstimateReport("interpolation", lhs, rhs, tolerance, metadata={"s1": s1, "s2": s2, "theta": theta})


def gradient_equivalence_check(field: SpectralField, s: float, p, r: float, part: DyadicPartition,
                               tolerance: float = 4.0) -> tuple[EstimateReport, EstimateReport]:
    """Both directions of ``||grad u||_{s-1} ~ ||u||_s`` as two reports."""
    nu = fb_norm(field, FBSpaceSpec(s, p, r), part)
    ng = fb_norm(gradient(field), FBSpaceSpec(s - 1, p, r), part)
    return (EstimateReport("gradient-upper", ng, nu, tolerance),
            EstimateReport("gradient-lower", nu, ng, tolerance))


def product_estimate_check(kind: str, u: SpectralField, v: SpectralField, part: DyadicPartition,
                           tolerance: float = math.inf, **params) -> EstimateReport:
    """Product estimates in constant-exponent Fourier-Besov spaces (summability 1).

    ``symmetric``: params ``s, p, p1, p2`` with ``1 + 1/p = 1/p1 + 1/p2``;
    ``||uv||_{s,p} <= C(||u||_{s,p1} ||v||_{0,p2} + ||u||_{0,p2} ||v||_{s,p1})``.

    ``asymmetric``: params ``s1, s2, p1, p2`` under the admissibility
    constraints; ``||uv||_{s1+s2-d(1-1/p2), p1} <= C ||u||_{s1,p1} ||v||_{s2,p2}``.
    """
    d = part.grid.dim
    uv = params.pop("uv", None) or product(u, v)
    if kind == "symmetric":
        s, p, p1, p2 = (float(params[k]) for k in ("s", "p", "p1", "p2"))
        if not s > 0:
            raise ParameterError("symmetric product estimate needs s > 0")
        if abs(1 + 1 / p - 1 / p1 - 1 / p2) > 1e-12:
            raise ParameterError("need 1 + 1/p = 1/p1 + 1/p2")
        lhs = fb_norm(uv, FBSpaceSpec(s, p, 1), part)
        rhs = (fb_norm(u, FBSpaceSpec(s, p1, 1), part) * fb_norm(v, FBSpaceSpec(0, p2, 1), part)
               + fb_norm(u, FBSpaceSpec(0, p2, 1), part) * fb_norm(v, FBSpaceSpec(s, p1, 1), part))
    elif kind == "asymmetric":
        s1, s2, p1, p2 = (float(params[k]) for k in ("s1", "s2", "p1", "p2"))
        if not (s1 <= d * min(1 - 1 / p1, 1 - 1 / p2) + 1e-12 and s2 <= d * (1 - 1 / p2) + 1e-12
                and s1 + s2 > max(0.0, d * (1 - 1 / p1 - 1 / p2))):
            raise ParameterError("regularity indices violate the asymmetric product constraints")
        lhs = fb_norm(uv, FBSpaceSpec(s1 + s2 - d * (1 - 1 / p2), p1, 1), part)
        rhs = fb_norm(u, FBSpaceSpec(s1, p1, 1), part) * fb_norm(v, FBSpaceSpec(s2, p2, 1), part)
    else:
        raise ParameterError(f"unknown product estimate {kind!r}")
    return EstimateReport(f"product-{kind}", lhs, rhs, tolerance, metadata=dict(params))
