"""Seeded random data.

Fields are band-limited: each dyadic band ``2^k <= |xi| < 2^(k+1)`` gets an
amplitude drawn log-uniformly from ``amp_range``, multiplied into complex
Gaussian coefficients on that band.  The coefficients are made Hermitian,
have zero mean and, for solenoidal vector fields, are Leray-projected.
Bands are fixed in physical frequency, so the same ``k_max`` gives
comparable data on refined grids.
"""
from __future__ import annotations

import math

import numpy as np

from .dyadic import DyadicPartition
from .errors import ParameterError
from .fbnorm import Trajectory
from .spectral import FORCED_ZERO, Grid, SpectralField, SymbolSpec, apply_symbol, mirror


def resolved_k_max(part: DyadicPartition) -> float:
    """Largest radius below which every dealiased lattice point is covered by the partition."""
    g = part.grid
    bad = (np.abs(part.mask_sum - 1.0) > 1e-12) & (g.xi_norm > 0) | ~g.dealias_mask
    return float(g.xi_norm[bad].min())


def hermitian(c: np.ndarray, dim: int) -> np.ndarray:
    return 0.5 * (c + np.conj(mirror(c, dim)))


def random_field(grid: Grid, rng: np.random.Generator, components: int = 1, k_min: float | None = None,
                 k_max: float | None = None, amp_range=(1e-2, 1.0), solenoidal: bool = False,
                 zero_mode: str = FORCED_ZERO) -> SpectralField:
    """Band-limited random field with log-uniform per-band amplitudes on ``k_min <= |xi| < k_max``."""
    lo, hi = amp_range
    if not 0 < lo <= hi:
        raise ParameterError("amplitude range must satisfy 0 < lo <= hi")
    r = grid.xi_norm
    k_min = 1.0 / grid.L if k_min is None else k_min
    k_max = grid.dealias_cutoff / grid.L if k_max is None else k_max
    support = (r >= k_min) & (r < k_max) & grid.dealias_mask & (r > 0)
    c = rng.standard_normal((components,) + grid.shape) + 1j * rng.standard_normal((components,) + grid.shape)
    band = np.floor(np.log2(np.where(r > 0, r, 1.0))).astype(int)
    bands = np.unique(band[support])
    amps = np.exp(rng.uniform(math.log(lo), math.log(hi), size=bands.size))
    weight = np.zeros(grid.shape)
    for b, a in zip(bands, amps):
        weight[support & (band == b)] = a
    c = hermitian(c * weight, grid.dim)
    field = SpectralField(grid, c, zero_mode)
    if solenoidal:
        field = apply_symbol(field, SymbolSpec.leray())
    return field


def single_mode(grid: Grid, n, amplitude=1.0, components: int = 1, zero_mode: str = FORCED_ZERO) -> SpectralField:
    """Real cosine mode ``amplitude * (e_n + e_-n)``; a vector ``amplitude`` sets each component."""
    n = tuple(int(k) % grid.n for k in n)
    m = tuple((-int(k)) % grid.n for k in n)
    amp = np.broadcast_to(np.asarray(amplitude, complex), (components,))
    c = np.zeros((components,) + grid.shape, complex)
    for comp in range(components):
        c[(comp,) + n] += amp[comp]
        c[(comp,) + m] += np.conj(amp[comp])
    return SpectralField(grid, c, zero_mode)


def random_profile_trajectory(field: SpectralField, times, rng: np.random.Generator, rate_range=(0.5, 2.0),
                              alpha: float = 2.0) -> Trajectory:
    """Time-dependent field ``e^{-c t Lambda^alpha} field`` with a random rate ``c``."""
    rate = rng.uniform(*rate_range)
    times = np.asarray(times, float)
    lam = field.grid.xi_norm**alpha
    coeffs = np.exp(-rate * times.reshape((-1,) + (1,) * (field.grid.dim + 1)) * lam) * field.coeffs
    return Trajectory(field.grid, times, coeffs, field.zero_mode)


def embed(field: SpectralField, grid: Grid) -> SpectralField:
    """Copy coefficients onto a finer grid with the same box (zero padding in frequency)."""
    src = field.grid
    if grid.dim != src.dim or grid.L != src.L or grid.n < src.n:
        raise ParameterError("target grid must refine the source grid on the same box")
    idx = [np.fft.fftfreq(src.n, 1.0 / src.n).astype(int) % grid.n] * src.dim
    c = np.zeros((field.components,) + grid.shape, complex)
    keep = ~src.nyquist_mask
    c[(slice(None),) + np.ix_(*idx)] = field.coeffs * keep
    return SpectralField(grid, c, field.zero_mode)


def embed_trajectory(traj: Trajectory, grid: Grid) -> Trajectory:
    fields = [embed(f, grid) for f in traj.snapshots]
    return Trajectory(grid, traj.times, np.stack([f.coeffs for f in fields]), traj.zero_mode)
