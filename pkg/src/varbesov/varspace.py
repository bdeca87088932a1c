"""Variable-exponent Lebesgue spaces on lattices.

Functions are arrays of samples with a quadrature weight (the cell volume).
The Luxemburg norm ``inf{lam > 0 : sum |f/lam|^p(x) w <= 1}`` is found by
safeguarded Newton in ``log lam`` inside a guaranteed bracket; for a constant exponent
the closed form is used.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import DimensionError, ExponentRangeError, ParameterError
from .reports import EstimateReport
from .spectral import FORCED_ZERO, Grid, SpectralField, SymbolSpec, apply_symbol, to_physical, to_spectral

P_CAP = 64.0
BISECTION_CAP = 200
REL_TOL = 1e-13


@dataclass(frozen=True, eq=False)
class ExponentField:
    """Sampled exponent ``p(x)`` with cached bounds.

    ``points`` holds the sample coordinates, shape ``(dim, *values.shape)``,
    and is used by the log-Holder diagnostics.
    """

    values: np.ndarray
    points: np.ndarray | None = None
    p_infinity: float | None = None
    params: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if not np.all(np.isfinite(v)):
            raise ExponentRangeError("exponent values must be finite")
        if v.min() <= 1.0:
            raise ExponentRangeError(f"p_minus = {v.min()} must exceed 1")
        if v.max() > P_CAP:
            raise ExponentRangeError(f"p_plus = {v.max()} exceeds the cap {P_CAP}")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        if self.p_infinity is None:
            object.__setattr__(self, "p_infinity", _far_value(v, self.points))

    @property
    def p_minus(self) -> float:
        return float(self.values.min())

    @property
    def p_plus(self) -> float:
        return float(self.values.max())

    @property
    def is_constant(self) -> bool:
        return self.p_minus == self.p_plus

    def to_json(self) -> dict:
        return {"p_minus": self.p_minus, "p_plus": self.p_plus, "p_infinity": self.p_infinity, **self.params}


def _far_value(values, points):
    if points is None:
        return float(values.reshape(-1)[-1])
    r = np.sqrt((np.asarray(points) ** 2).sum(axis=0))
    return float(values[r == r.max()].mean())


def make_exponent(kind: str, grid: Grid, domain: str = "frequency", **params) -> ExponentField:
    """Exponent generators.

    ``constant`` (``p0``), ``decay`` (``p_inf``, ``a``: ``1/p = 1/p_inf - a / log(e + |x|)``,
    clipped at ``p <= 64``) or ``custom`` (``values``).  ``domain`` selects the
    frequency lattice or the physical grid as the sample points.
    """
    if domain == "frequency":
        pts = grid.xi
    elif domain == "physical":
        pts = grid.x
    else:
        raise ParameterError(f"unknown domain {domain!r}")
    r = np.sqrt((pts**2).sum(axis=0))
    meta = {"kind": kind, "domain": domain, **{k: v for k, v in params.items() if k != "values"}}
    if kind == "constant":
        p0 = float(params["p0"])
        return ExponentField(np.full(grid.shape, p0), pts, p0, meta)
    if kind == "decay":
        p_inf, a = float(params["p_inf"]), float(params["a"])
        inv = 1.0 / p_inf - a / np.log(math.e + r)
        inv = np.maximum(inv, 1.0 / P_CAP)
        if inv.max() >= 1.0:
            raise ExponentRangeError("decay family leaves p > 1; reduce |a|")
        return ExponentField(1.0 / inv, pts, p_inf, meta)
    if kind == "custom":
        values = np.asarray(params["values"], float)
        if values.shape != grid.shape:
            raise DimensionError("custom exponent does not fit the grid")
        return ExponentField(values, pts, params.get("p_inf"), meta)
    raise ParameterError(f"unknown exponent kind {kind!r}")


def _as_arrays(f, p, weight):
    if isinstance(f, SpectralField):
        if weight is None:
            weight = f.grid.cell_volume
        f = f.magnitude()
    if weight is None:
        weight = 1.0
    a = np.abs(np.asarray(f))
    if isinstance(p, ExponentField):
        p = p.values
    p = np.asarray(p, float)
    if p.ndim and p.shape != a.shape:
        raise DimensionError(f"exponent shape {p.shape} does not match function shape {a.shape}")
    return a, p, weight


def modular(f, p, weight: float | None = None) -> float:
    """``sum |f|^p(x) * weight``."""
    a, p, w = _as_arrays(f, p, weight)
    return float((a**p).sum() * w)


def lp_norm(a: np.ndarray, p: float, weight: float, axis=-1) -> np.ndarray:
    """Classical discrete ``L^p`` norm along ``axis`` (``p = inf`` gives the max)."""
    a = np.abs(a)
    if math.isinf(p):
        return a.max(axis=axis) if a.shape[axis] else np.zeros(a.shape[:-1])
    return ((a**p).sum(axis=axis) * weight) ** (1.0 / p)


def luxemburg_rows(a: np.ndarray, p, weight: float) -> np.ndarray:
    """Luxemburg norm of each row of ``a`` (shape ``(B, M)``) for a shared exponent.

    ``p`` is a scalar or an array of shape ``(M,)``.  Rows are solved
    together in ``log lam`` by bracketed Newton; the bracket comes from the modular at ``lam = 1``:
    with ``m = rho(f)`` the norm lies between ``m^(1/p+)`` and ``m^(1/p-)``.
    """
    a = np.abs(np.atleast_2d(np.asarray(a, float)))
    p = np.asarray(p, float)
    if p.ndim == 0 or p.size == 0 or p.min() == p.max():
        pc = float(p) if p.ndim == 0 else (float(p.reshape(-1)[0]) if p.size else 2.0)
        return lp_norm(a, pc, weight)
    p_lo, p_hi = float(p.min()), float(p.max())
    out = np.zeros(a.shape[0])
    live = a.max(axis=1) > 0
    if not live.any():
        return out
    with np.errstate(divide="ignore"):
        logs = np.log(a[live])
    logw = math.log(weight)

    def log_modular(mu):
        # log sum w exp(p (log|f| - mu)) and its mu-derivative, stabilised row-wise
        e = p * (logs - mu[:, None])
        top = e.max(axis=1)
        w = np.exp(e - top[:, None])
        tot = w.sum(axis=1)
        return top + np.log(tot) + logw, -(w * p).sum(axis=1) / tot

    log_m, slope0 = log_modular(np.zeros(logs.shape[0]))
    lo = np.where(log_m >= 0, log_m / p_hi, log_m / p_lo) - 1e-9
    hi = np.where(log_m >= 0, log_m / p_lo, log_m / p_hi) + 1e-9
    mu = np.clip(-log_m / slope0, lo, hi)
    # safeguarded Newton: the log-modular is decreasing in mu, so the bracket
    # shrinks every step and a Newton step leaving it falls back to bisection
    for _ in range(BISECTION_CAP):
        val, slope = log_modular(mu)
        above = val > 0
        lo = np.where(above, mu, lo)
        hi = np.where(above, hi, mu)
        step = -val / slope
        if np.all(np.abs(step) <= REL_TOL * np.maximum(1.0, np.abs(mu))):
            mu = mu + step
            break
        new = mu + step
        mu = np.where((new >= lo) & (new <= hi), new, 0.5 * (lo + hi))
    out[live] = np.exp(mu)
    return out


def var_norm(f, p, weight: float | None = None) -> float:
    """Luxemburg norm of ``f`` in ``L^p(.)``; 0 for ``f = 0``."""
    a, p, w = _as_arrays(f, p, weight)
    pr = p.reshape(-1) if p.ndim else p
    return float(luxemburg_rows(a.reshape(1, -1), pr, w)[0])


def holder_check(f, g, p1, p2, weight: float | None = None, tolerance: float = 2.0) -> EstimateReport:
    """``||fg||_p <= C ||f||_p1 ||g||_p2`` with ``1/p = 1/p1 + 1/p2``; asserts ``C <= tolerance``."""
    a, q1, w = _as_arrays(f, p1, weight)
    b, q2, _ = _as_arrays(g, p2, weight)
    inv = 1.0 / q1 + 1.0 / q2
    if np.max(inv) >= 1.0:
        raise ExponentRangeError("1/p1 + 1/p2 must stay below 1")
    p = 1.0 / inv
    lhs = var_norm(a * b, p, w)
    rhs = var_norm(a, q1, w) * var_norm(b, q2, w)
    return EstimateReport("holder", lhs, rhs, tolerance)


def mixed_sequence_modular(blocks, p, r, weight: float | None = None) -> float:
    """``sum_j || |f_j|^r(.) ||_{p(.)/r(.)}``, the modular of the mixed sequence space for bounded ``r``."""
    q = np.asarray(p.values if isinstance(p, ExponentField) else p, float)
    rr = np.asarray(r.values if isinstance(r, ExponentField) else r, float)
    if np.min(rr) < 1:
        raise ExponentRangeError("summability exponent must be >= 1")
    ratio = q / rr
    if np.min(ratio) < 1:
        raise ExponentRangeError("p / r must be >= 1 pointwise")
    total = 0.0
    for fj in blocks:
        a, _, w = _as_arrays(fj, 2.0, weight)
        total += var_norm(a**rr, np.broadcast_to(ratio, a.shape) if ratio.ndim else ratio, w)
    return total


@dataclass
class LogHolderReport:
    c_local: float
    c_decay: float
    sample_count: int
    min_spacing: float

    def is_log_holder(self, threshold: float = 1.0) -> bool:
        return self.c_local <= threshold and self.c_decay <= threshold


def log_holder_constants(p: ExponentField, max_pairs: int = 10**6, seed: int = 0) -> LogHolderReport:
    """Best constants in the local and decay log-Holder conditions over sampled pairs.

    All pairs are used up to ``max_pairs``; beyond that a seeded uniform sample.
    """
    if p.points is None:
        raise ParameterError("exponent carries no sample points")
    pts = np.asarray(p.points, float).reshape(p.points.shape[0], -1).T
    inv = 1.0 / p.values.reshape(-1)
    m = inv.size
    r = np.sqrt((pts**2).sum(axis=1))
    c_decay = float((np.abs(inv - 1.0 / p.p_infinity) * np.log(math.e + r)).max())
    total = m * (m - 1) // 2
    c_local, min_spacing = 0.0, math.inf

    def scan(i, j):
        nonlocal c_local, min_spacing
        dist = np.sqrt(((pts[i] - pts[j]) ** 2).sum(axis=1))
        val = np.abs(inv[i] - inv[j]) * np.log(math.e + 1.0 / dist)
        c_local = max(c_local, float(val.max(initial=0.0)))
        min_spacing = min(min_spacing, float(dist.min(initial=math.inf)))

    if total <= max_pairs:
        for i0 in range(m - 1):
            j = np.arange(i0 + 1, m)
            scan(np.full(j.size, i0), j)
        count = total
    else:
        rng = np.random.default_rng(seed)
        i = rng.integers(0, m, max_pairs)
        j = rng.integers(0, m - 1, max_pairs)
        j = j + (j >= i)
        scan(i, j)
        count = max_pairs
    return LogHolderReport(c_local, c_decay, count, min_spacing)


def _ball_offsets(grid: Grid, radius_cells: int) -> np.ndarray:
    """Indicator of the centred lattice ball of radius ``k`` cells on the periodic grid."""
    k = np.fft.fftfreq(grid.n, 1.0 / grid.n)
    dist2 = sum(c**2 for c in np.meshgrid(*([k] * grid.dim), indexing="ij"))
    return (dist2 <= radius_cells**2).astype(float)


def maximal_function(f: np.ndarray, grid: Grid) -> np.ndarray:
    """Centred maximal function over lattice balls of radius ``k h``, ``k = 0 .. N/2 - 1``."""
    a = np.abs(np.asarray(f, float))
    if a.shape != grid.shape:
        raise DimensionError("function does not fit the grid")
    fa = np.fft.fftn(a)
    out = a.copy()
    for k in range(1, grid.n // 2):
        ball = _ball_offsets(grid, k)
        avg = np.fft.ifftn(fa * np.fft.fftn(ball)).real / ball.sum()
        np.maximum(out, avg, out=out)
    return out


def maximal_boundedness_check(f: np.ndarray, p: ExponentField, grid: Grid, tolerance: float = math.inf) -> EstimateReport:
    w = grid.physical_cell_volume
    lhs = var_norm(maximal_function(f, grid), p, w)
    return EstimateReport("maximal-function", lhs, var_norm(f, p, w), tolerance)


def riesz_boundedness_check(f: np.ndarray, p: ExponentField, axis: int, grid: Grid,
                            tolerance: float = math.inf, log_holder_threshold: float = 1.0) -> EstimateReport:
    """``||R_axis f||_p / ||f||_p`` with ``p`` sampled on the physical grid."""
    f = np.asarray(f, float)
    if not np.any(f):
        raise ParameterError("ratio undefined for f = 0")
    rf = to_physical(apply_symbol(to_spectral(f, grid, FORCED_ZERO), SymbolSpec.riesz(axis)))
    w = grid.physical_cell_volume
    lh = log_holder_constants(p, max_pairs=20000)
    return EstimateReport("riesz", var_norm(rf, p, w), var_norm(f, p, w), tolerance,
                          metadata={"axis": axis, "log_holder": lh.is_log_holder(log_holder_threshold)})
