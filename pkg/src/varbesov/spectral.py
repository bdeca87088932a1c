"""Periodic grids, Fourier transforms and Fourier multipliers.

The whole space is replaced by the box ``[-pi L, pi L]^d`` sampled on ``N``
points per axis.  Frequencies live on the lattice ``n / L`` with
``n in {-N/2, ..., N/2 - 1}``.  Coefficients are stored as samples of the
unitary continuous Fourier transform

    f^(xi) = (2 pi)^(-d/2) * int f(x) exp(-i x.xi) dx,

approximated by the rectangle rule on the box, so that frequency-side
integrals become lattice sums weighted by the cell volume ``L^-d``.  With this
normalisation Parseval holds exactly:
``sum |f^|^2 L^-d == sum |f|^2 h^d`` with ``h = 2 pi L / N``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from functools import cached_property

import numpy as np

from .errors import ComponentError, DimensionError, ParameterError, SymmetryError, ZeroModeError
from .reports import EstimateReport

FORCED_ZERO = "forced-zero"
FREE = "free"
_POLICIES = (FORCED_ZERO, FREE)


@dataclass(frozen=True)
class Grid:
    dim: int
    n: int
    L: float = 1.0

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise DimensionError(f"dim must be 1, 2 or 3, got {self.dim}")
        if self.n < 8 or self.n & (self.n - 1):
            raise DimensionError(f"points per axis must be a power of two >= 8, got {self.n}")
        if not self.L > 0:
            raise DimensionError(f"box half width must be positive, got {self.L}")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def spacing(self) -> float:
        return 2 * math.pi * self.L / self.n

    @property
    def cell_volume(self) -> float:
        """Frequency-lattice cell volume ``L^-d``."""
        return self.L ** (-self.dim)

    @property
    def physical_cell_volume(self) -> float:
        return self.spacing**self.dim

    @property
    def dealias_cutoff(self) -> int:
        """Largest integer frequency kept by the 2/3 rule."""
        return self.n // 3

    @cached_property
    def int_freq(self) -> np.ndarray:
        """Integer frequency indices, shape ``(dim, *shape)``."""
        k = np.fft.fftfreq(self.n, 1.0 / self.n).round().astype(np.int64)
        return np.array(np.meshgrid(*([k] * self.dim), indexing="ij"))

    @cached_property
    def xi(self) -> np.ndarray:
        return self.int_freq / self.L

    @cached_property
    def xi_norm(self) -> np.ndarray:
        return np.sqrt((self.xi**2).sum(axis=0))

    @cached_property
    def x(self) -> np.ndarray:
        """Physical sample points, shape ``(dim, *shape)``."""
        axis = -math.pi * self.L + self.spacing * np.arange(self.n)
        return np.array(np.meshgrid(*([axis] * self.dim), indexing="ij"))

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        return np.all(np.abs(self.int_freq) <= self.dealias_cutoff, axis=0)

    @cached_property
    def nyquist_mask(self) -> np.ndarray:
        return np.any(self.int_freq == -self.n // 2, axis=0)

    @cached_property
    def _transform_factor(self) -> np.ndarray:
        # (2pi)^(-d/2) h^d (-1)^(n_1 + ... + n_d); the sign accounts for the box starting at -pi L
        sign = np.where(self.int_freq.sum(axis=0) % 2 == 0, 1.0, -1.0)
        return (2 * math.pi) ** (-self.dim / 2) * self.physical_cell_volume * sign

    @property
    def zero_index(self) -> tuple[int, ...]:
        return (0,) * self.dim

    @property
    def resolved_max_frequency(self) -> float:
        """Largest ``|xi|`` inside the dealiased cube."""
        return math.sqrt(self.dim) * self.dealias_cutoff / self.L

    def refined(self, factor: int = 2) -> "Grid":
        return Grid(self.dim, self.n * factor, self.L)


def mirror(a: np.ndarray, dim: int) -> np.ndarray:
    """Return ``a(-xi)`` for arrays whose trailing ``dim`` axes are lattice axes."""
    axes = tuple(range(a.ndim - dim, a.ndim))
    return np.roll(np.flip(a, axis=axes), 1, axis=axes)


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Fourier coefficients of a scalar or vector field on a grid.

    ``coeffs`` has shape ``(components, *grid.shape)`` and is made read-only.
    Under the ``forced-zero`` policy the zero mode must vanish exactly.
    """

    grid: Grid
    coeffs: np.ndarray
    zero_mode: str = FORCED_ZERO
    real: bool = True

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.complex128)
        if c.shape == self.grid.shape:
            c = c[None]
        if c.ndim != self.grid.dim + 1 or c.shape[1:] != self.grid.shape:
            raise DimensionError(f"coefficient shape {c.shape} does not fit grid {self.grid.shape}")
        if self.zero_mode not in _POLICIES:
            raise ParameterError(f"unknown zero-mode policy {self.zero_mode!r}")
        if self.zero_mode == FORCED_ZERO and np.any(c[(slice(None),) + self.grid.zero_index] != 0):
            raise ZeroModeError("nonzero zero mode under the forced-zero policy")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @property
    def components(self) -> int:
        return self.coeffs.shape[0]

    def replace(self, coeffs, zero_mode: str | None = None) -> "SpectralField":
        return SpectralField(self.grid, coeffs, self.zero_mode if zero_mode is None else zero_mode, self.real)

    def magnitude(self) -> np.ndarray:
        """Pointwise Euclidean length over components, shape ``grid.shape``."""
        if self.components == 1:
            return np.abs(self.coeffs[0])
        return np.sqrt((np.abs(self.coeffs) ** 2).sum(axis=0))

    def norm(self) -> float:
        """L2 norm (equal on both sides by Parseval)."""
        return float(np.sqrt((np.abs(self.coeffs) ** 2).sum() * self.grid.cell_volume))

    def hermitian_defect(self) -> float:
        return float(np.abs(self.coeffs - np.conj(mirror(self.coeffs, self.grid.dim))).max())

    def __add__(self, other: "SpectralField") -> "SpectralField":
        return self.replace(self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        return self.replace(self.coeffs - other.coeffs)

    def __mul__(self, scalar: float) -> "SpectralField":
        return self.replace(self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "SpectralField":
        return self.replace(-self.coeffs)


def zeros(grid: Grid, components: int = 1, zero_mode: str = FORCED_ZERO) -> SpectralField:
    return SpectralField(grid, np.zeros((components,) + grid.shape, complex), zero_mode)


def to_spectral(samples: np.ndarray, grid: Grid, zero_mode: str = FORCED_ZERO) -> SpectralField:
    """Transform physical samples (``grid.shape`` or ``(c, *grid.shape)``).

    Under the forced-zero policy the mean is removed.
    """
    a = np.asarray(samples, dtype=float)
    if a.shape == grid.shape:
        a = a[None]
    if a.ndim != grid.dim + 1 or a.shape[1:] != grid.shape:
        raise DimensionError(f"sample shape {np.shape(samples)} does not fit grid {grid.shape}")
    axes = tuple(range(1, grid.dim + 1))
    c = np.fft.fftn(a, axes=axes) * grid._transform_factor
    if zero_mode == FORCED_ZERO:
        c[(slice(None),) + grid.zero_index] = 0
    return SpectralField(grid, c, zero_mode)


def to_physical(field: SpectralField, tol: float = 1e-12) -> np.ndarray:
    """Inverse transform.  Scalars come back with shape ``grid.shape``."""
    g = field.grid
    axes = tuple(range(1, g.dim + 1))
    a = np.fft.ifftn(field.coeffs / g._transform_factor, axes=axes)
    scale = np.abs(a).max() if a.size else 0.0
    residue = np.abs(a.imag).max() if a.size else 0.0
    if residue > tol * max(scale, np.finfo(float).tiny):
        raise SymmetryError(f"imaginary residue {residue:.3e} relative to {scale:.3e}: field is not Hermitian")
    out = a.real
    return out[0] if field.components == 1 else out


def dealias(field: SpectralField) -> SpectralField:
    """Zero everything outside the 2/3-rule cube (Nyquist planes included)."""
    return field.replace(field.coeffs * field.grid.dealias_mask)


def product(f: SpectralField, g: SpectralField, zero_mode: str = FORCED_ZERO) -> SpectralField:
    """Dealiased pointwise product of a scalar with a scalar or vector field."""
    if f.grid != g.grid:
        raise DimensionError("fields live on different grids")
    if f.components != 1 and g.components != 1:
        raise ComponentError("product needs at least one scalar factor")
    a = to_physical(f).reshape((f.components,) + f.grid.shape)
    b = to_physical(g).reshape((g.components,) + g.grid.shape)
    return dealias(to_spectral(a * b, f.grid, zero_mode))


@dataclass(frozen=True)
class SymbolSpec:
    """A Fourier multiplier.  Build with the classmethods."""

    kind: str
    params: dict = dc_field(default_factory=dict)

    @classmethod
    def fractional_laplacian(cls, alpha: float) -> "SymbolSpec":
        _check_alpha(alpha)
        return cls("fractional_laplacian", {"alpha": alpha})

    @classmethod
    def inverse_neg_laplacian(cls) -> "SymbolSpec":
        return cls("inverse_neg_laplacian")

    @classmethod
    def gradient(cls, axis: int) -> "SymbolSpec":
        return cls("gradient", {"axis": axis})

    @classmethod
    def divergence(cls) -> "SymbolSpec":
        return cls("divergence")

    @classmethod
    def riesz(cls, axis: int) -> "SymbolSpec":
        return cls("riesz", {"axis": axis})

    @classmethod
    def heat(cls, t: float, alpha: float) -> "SymbolSpec":
        _check_alpha(alpha)
        if t < 0:
            raise ParameterError(f"heat multiplier needs t >= 0, got {t}")
        return cls("heat_multiplier", {"t": t, "alpha": alpha})

    @classmethod
    def leray(cls) -> "SymbolSpec":
        return cls("leray")

    @property
    def singular(self) -> bool:
        return self.kind in ("inverse_neg_laplacian", "riesz")

    @property
    def odd(self) -> bool:
        return self.kind in ("gradient", "divergence", "riesz")


def _check_alpha(alpha: float) -> None:
    if not 0 < alpha <= 2:
        raise ParameterError(f"alpha must lie in (0, 2], got {alpha}")


def symbol_values(grid: Grid, sym: SymbolSpec) -> np.ndarray:
    """Scalar symbol ``m(xi)`` on the lattice; the value at ``xi = 0`` is set to 0 for singular symbols.

    Not defined for the matrix-valued Leray symbol or the divergence.
    """
    r = grid.xi_norm
    with np.errstate(divide="ignore", invalid="ignore"):
        if sym.kind == "fractional_laplacian":
            return r ** sym.params["alpha"]
        if sym.kind == "heat_multiplier":
            return np.exp(-sym.params["t"] * r ** sym.params["alpha"])
        if sym.kind == "inverse_neg_laplacian":
            m = 1.0 / r**2
        elif sym.kind == "gradient":
            return 1j * grid.xi[_axis(grid, sym)]
        elif sym.kind == "riesz":
            m = -1j * grid.xi[_axis(grid, sym)] / r
        else:
            raise ParameterError(f"{sym.kind} has no scalar symbol")
    m[grid.zero_index] = 0
    return m


def _axis(grid: Grid, sym: SymbolSpec) -> int:
    axis = sym.params["axis"]
    if not 0 <= axis < grid.dim:
        raise ParameterError(f"axis {axis} out of range for dim {grid.dim}")
    return axis


def leray_matrix(grid: Grid) -> np.ndarray:
    """``delta_ij - xi_i xi_j / |xi|^2``, shape ``(d, d, *shape)``; identity at ``xi = 0``."""
    r2 = grid.xi_norm**2
    r2 = np.where(r2 == 0, 1.0, r2)
    xi = grid.xi
    eye = np.eye(grid.dim).reshape((grid.dim, grid.dim) + (1,) * grid.dim)
    return eye - xi[:, None] * xi[None, :] / r2


def apply_symbol(field: SpectralField, sym: SymbolSpec) -> SpectralField:
    """Multiply coefficients by a Fourier multiplier.

    Odd symbols (gradient, divergence, Riesz) are zeroed on the Nyquist
    planes so that real fields stay real.
    """
    g = field.grid
    if sym.singular and field.zero_mode != FORCED_ZERO:
        raise ZeroModeError(f"{sym.kind} is singular at xi = 0 and needs the forced-zero policy")
    c = field.coeffs
    if sym.kind == "leray":
        if field.components != g.dim:
            raise ComponentError(f"Leray projection needs {g.dim} components, got {field.components}")
        out = np.einsum("ij...,j...->i...", leray_matrix(g), c)
    elif sym.kind == "divergence":
        if field.components != g.dim:
            raise ComponentError(f"divergence needs {g.dim} components, got {field.components}")
        out = (1j * g.xi * c).sum(axis=0)[None]
    else:
        out = c * symbol_values(g, sym)
    if sym.odd:
        out = out * ~g.nyquist_mask
    return field.replace(out)


def gradient(field: SpectralField) -> SpectralField:
    """Vector gradient of a scalar field."""
    if field.components != 1:
        raise ComponentError("gradient expects a scalar field")
    g = field.grid
    return field.replace((1j * g.xi * field.coeffs[0]) * ~g.nyquist_mask)


def divergence(field: SpectralField) -> SpectralField:
    return apply_symbol(field, SymbolSpec.divergence())


def semigroup_composition_check(field: SpectralField, t1: float, t2: float, alpha: float,
                                tolerance: float = 1e-13) -> EstimateReport:
    """Compare propagation by ``t1 + t2`` with propagating by ``t1`` then ``t2``.

    Reports the largest relative deviation over lattice points; points whose
    propagated value has underflowed below ``1e-250`` of the coefficient are
    skipped since their relative error is meaningless.
    """
    if t1 < 0 or t2 < 0:
        raise ParameterError("times must be nonnegative")
    direct = apply_symbol(field, SymbolSpec.heat(t1 + t2, alpha)).coeffs
    composed = apply_symbol(apply_symbol(field, SymbolSpec.heat(t1, alpha)), SymbolSpec.heat(t2, alpha)).coeffs
    scale = np.abs(field.coeffs)
    keep = np.abs(direct) > 1e-250 * scale
    dev = 0.0
    if keep.any():
        dev = float((np.abs(direct - composed)[keep] / np.abs(direct)[keep]).max())
    return EstimateReport("semigroup-composition", dev, 1.0, tolerance, ratio=dev,
                          metadata={"t1": t1, "t2": t2, "alpha": alpha})


def write_snapshot(field: SpectralField, path) -> None:
    """CSV snapshot: ``#`` header with grid metadata, then ``component,i_1..i_d,re,im`` rows."""
    g = field.grid
    idx = g.int_freq.reshape(g.dim, -1).T
    with open(path, "w", newline="") as fh:
        fh.write(f"# dim={g.dim} N={g.n} L={float(g.L)!r} zero_mode_policy={field.zero_mode} "
                 f"components={field.components}\n")
        fh.write("component," + ",".join(f"i{k}" for k in range(g.dim)) + ",re,im\n")
        for comp in range(field.components):
            flat = field.coeffs[comp].reshape(-1)
            for ij, z in zip(idx, flat):
                fh.write(f"{comp}," + ",".join(str(int(i)) for i in ij) + f",{float(z.real)!r},{float(z.imag)!r}\n")


def read_snapshot(path) -> SpectralField:
    with open(path) as fh:
        header = fh.readline()
        meta = dict(item.split("=", 1) for item in header[1:].split())
        fh.readline()
        rows = np.loadtxt(fh, delimiter=",", ndmin=2)
    g = Grid(int(meta["dim"]), int(meta["N"]), float(meta["L"]))
    comps = int(meta["components"])
    coeffs = np.zeros((comps,) + g.shape, complex)
    for row in rows:
        index = tuple(int(i) % g.n for i in row[1:1 + g.dim])
        coeffs[(int(row[0]),) + index] = row[-2] + 1j * row[-1]
    return SpectralField(g, coeffs, meta["zero_mode_policy"])
