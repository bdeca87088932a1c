"""Littlewood-Paley partition on the frequency lattice.

The radial profile ``chi`` equals 1 on ``[0, 3/4]``, vanishes on
``[4/3, inf)`` and is joined by the ``exp(-1/x)`` smooth step; shells are
``phi(xi) = chi(xi / 2) - chi(xi)``.  Since

    sum_{j=a}^{b} phi(2^-j xi) = chi(2^-(b+1) xi) - chi(2^-a xi),

the finite family sums to one exactly on ``(4/3) 2^a <= |xi| <= (3/2) 2^b``,
which fixes the index range: ``j_min`` is the largest ``a`` with
``(4/3) 2^a`` at or below the smallest nonzero lattice frequency and ``j_max``
the smallest ``b`` with ``(3/2) 2^b`` at or above the corner of the dealiased
cube.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import PartitionIndexError, ResolutionError
from .spectral import Grid, SpectralField

INNER = 3.0 / 4.0
OUTER = 4.0 / 3.0


def _smooth_step_weight(x):
    x = np.asarray(x, float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = np.exp(-1.0 / x[pos])
    return out


def chi(r) -> np.ndarray:
    """Radial low-pass profile, non-increasing, exactly 1 below 3/4 and 0 above 4/3."""
    r = np.asarray(r, float)
    t = (r - INNER) / (OUTER - INNER)
    a = _smooth_step_weight(1.0 - t)
    b = _smooth_step_weight(t)
    with np.errstate(invalid="ignore"):
        out = np.where(t <= 0, 1.0, np.where(t >= 1, 0.0, a / (a + b)))
    return out


def phi(r) -> np.ndarray:
    r = np.asarray(r, float)
    return chi(r / 2.0) - chi(r)


@dataclass(frozen=True, eq=False)
class DyadicPartition:
    grid: Grid
    j_min: int
    j_max: int
    phi_masks: np.ndarray  # (j_max - j_min + 1, *shape)
    chi_masks: np.ndarray  # (j_max - j_min + 2, *shape), for j in [j_min, j_max + 1]

    @property
    def js(self) -> range:
        return range(self.j_min, self.j_max + 1)

    def _check(self, j: int, upper: int) -> None:
        if not self.j_min <= j <= upper:
            raise PartitionIndexError(f"j = {j} outside [{self.j_min}, {upper}]")

    def phi_mask(self, j: int) -> np.ndarray:
        self._check(j, self.j_max)
        return self.phi_masks[j - self.j_min]

    def chi_mask(self, j: int) -> np.ndarray:
        self._check(j, self.j_max + 1)
        return self.chi_masks[j - self.j_min]

    @cached_property
    def supports(self) -> list[tuple[np.ndarray, np.ndarray]]:
        """Per shell: flat lattice indices where ``phi_j > 0`` and the mask values there."""
        out = []
        for mask in self.phi_masks:
            flat = mask.reshape(-1)
            idx = np.flatnonzero(flat)
            out.append((idx, flat[idx]))
        return out

    @cached_property
    def mask_sum(self) -> np.ndarray:
        return self.phi_masks.sum(axis=0)

    def unity_deviation(self) -> float:
        """Max ``|sum_j phi_j - 1|`` over nonzero lattice points of the dealiased cube."""
        g = self.grid
        sel = g.dealias_mask & (g.xi_norm > 0)
        return float(np.abs(self.mask_sum[sel] - 1.0).max())

    def to_json(self) -> dict:
        r = np.linspace(0.0, 2.0, 65)
        return {
            "dim": self.grid.dim,
            "N": self.grid.n,
            "L": self.grid.L,
            "j_min": self.j_min,
            "j_max": self.j_max,
            "profile_r": r.tolist(),
            "profile_chi": chi(r).tolist(),
        }


def partition_range(grid: Grid) -> tuple[int, int]:
    xi_min = 1.0 / grid.L
    j_min = math.floor(math.log2(xi_min / OUTER))
    while OUTER * 2.0 ** (j_min + 1) <= xi_min * (1 + 1e-12):
        j_min += 1
    while OUTER * 2.0**j_min > xi_min * (1 + 1e-12):
        j_min -= 1
    top = grid.resolved_max_frequency
    j_max = math.ceil(math.log2(top / 1.5))
    while 1.5 * 2.0 ** (j_max - 1) >= top:
        j_max -= 1
    while 1.5 * 2.0**j_max < top:
        j_max += 1
    return j_min, j_max


def build_partition(grid: Grid) -> DyadicPartition:
    j_min, j_max = partition_range(grid)
    if j_max - j_min + 1 < 3:
        raise ResolutionError(f"grid hosts only {j_max - j_min + 1} dyadic shells, need 3")
    r = grid.xi_norm
    phis = np.stack([phi(r * 2.0**-j) for j in range(j_min, j_max + 1)])
    chis = np.stack([chi(r * 2.0**-j) for j in range(j_min, j_max + 2)])
    return DyadicPartition(grid, j_min, j_max, phis, chis)


def block(field: SpectralField, part: DyadicPartition, j: int) -> SpectralField:
    """Dyadic block: multiply by ``phi(2^-j xi)``."""
    return field.replace(field.coeffs * part.phi_mask(j))


def low_cutoff(field: SpectralField, part: DyadicPartition, j: int) -> SpectralField:
    """Low-frequency cutoff: multiply by ``chi(2^-j xi)``."""
    return field.replace(field.coeffs * part.chi_mask(j))


def single_shell_region(part: DyadicPartition, j: int) -> np.ndarray:
    """Lattice points seen by shell ``j`` and by no other shell."""
    others = np.delete(part.phi_masks, j - part.j_min, axis=0)
    return (part.phi_mask(j) > 0) & ~np.any(others > 0, axis=0)
