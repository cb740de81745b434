"""Deferred-correction finite differences with Karp farfield boundaries for disk scattering."""

from .assembly import ScatteringSystem, assemble_second_order, karp_radial_coeffs, residual
from .dc import CorrectionSpec, build_correction_vector
from .fdstencil import Stencil, centered, fd_weights, fitted
from .grid import PolarGrid, UnknownLayout, build_grid
from .ks4 import assemble_ks4
from .oracle import ExactConfig, exact_ffp, exact_scattered
from .postprocess import l2_rel_error, numerical_ffp, observed_orders
from .solver import SolutionSet, dc_ladder, factorize, solve, solve_ks4

__version__ = "0.1.0"

__all__ = [
    "ScatteringSystem",
    "assemble_second_order",
    "karp_radial_coeffs",
    "residual",
    "CorrectionSpec",
    "build_correction_vector",
    "Stencil",
    "centered",
    "fd_weights",
    "fitted",
    "PolarGrid",
    "UnknownLayout",
    "build_grid",
    "assemble_ks4",
    "ExactConfig",
    "exact_ffp",
    "exact_scattered",
    "l2_rel_error",
    "numerical_ffp",
    "observed_orders",
    "SolutionSet",
    "dc_ladder",
    "factorize",
    "solve",
    "solve_ks4",
]
