"""Optimal recovery on periodic classes bounded in several higher derivatives."""

from .classes import ClassSpec, Variant, is_member, sample_member, seminorm
from .ideal_spline import IdealSpline, SolverError, SolverOptions, find_ideal_spline, validate_ideal_spline
from .interpolation import build_space, interpolate, method_weights, pattern_from_ideal, space_from_ideal
from .piecewise import TWO_PI, PiecewisePolynomial
from .recovery import (
    best_error_norm,
    best_error_point,
    empirical_worst_error,
    node_optimality_gap,
    recover_function,
    recover_point,
    uniform_nodes,
)

__version__ = "0.1.0"

__all__ = [
    "TWO_PI",
    "ClassSpec",
    "IdealSpline",
    "PiecewisePolynomial",
    "SolverError",
    "SolverOptions",
    "Variant",
    "best_error_norm",
    "best_error_point",
    "build_space",
    "empirical_worst_error",
    "find_ideal_spline",
    "interpolate",
    "is_member",
    "method_weights",
    "node_optimality_gap",
    "pattern_from_ideal",
    "recover_function",
    "recover_point",
    "sample_member",
    "seminorm",
    "space_from_ideal",
    "uniform_nodes",
    "validate_ideal_spline",
    "__version__",
]
