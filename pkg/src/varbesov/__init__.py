"""Spectral laboratory for variable-exponent Fourier-Besov spaces, the fractional
heat semigroup and mild solutions of generalized Navier-Stokes and
fractional Keller-Segel systems on a periodic box."""

from .dyadic import DyadicPartition, build_partition
from .errors import VarBesovError
from .fbnorm import FBSpaceSpec, Trajectory, chemin_lerner_norm, fb_norm
from .reports import EstimateReport
from .semigroup import LinearProblem, duhamel, propagate, solve_linear, verify_linear_estimate
from .solvers import (FixedPointConfig, FlowProblem, ScalarToy, critical_scaling_check, leray_project,
                      picard_solve, verify_bilinear_estimate)
from .spectral import Grid, SpectralField, SymbolSpec, apply_symbol, to_physical, to_spectral
from .varspace import ExponentField, make_exponent, var_norm

__all__ = [
    "DyadicPartition", "EstimateReport", "ExponentField", "FBSpaceSpec", "FixedPointConfig", "FlowProblem",
    "Grid", "LinearProblem", "ScalarToy", "SpectralField", "SymbolSpec", "Trajectory", "VarBesovError",
    "apply_symbol", "build_partition", "chemin_lerner_norm", "critical_scaling_check", "duhamel", "fb_norm",
    "leray_project", "make_exponent", "picard_solve", "propagate", "solve_linear", "to_physical", "to_spectral",
    "var_norm", "verify_bilinear_estimate", "verify_linear_estimate",
]
