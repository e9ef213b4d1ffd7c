"""Hugoniot curves and shock admissibility/stability criteria for systems of
conservation laws with a convex entropy."""

__version__ = "0.1.0"

from .criteria import (
    TolerancePolicy,
    entropy_dissipation,
    evaluate_point,
    lax_check,
    lopatinski,
    lv_conditions,
    proof_diagnostics,
    relative_entropy,
    relative_entropy_derivative,
)
from .hugoniot import (
    ContinuationConfig,
    extend_curve,
    locate_parameter,
    point_at,
    seed_curve,
    trace_branches,
    trace_hugoniot,
)
from .model import (
    ConditionReport,
    HugoniotCurve,
    HugoniotPoint,
    SpectralData,
    SystemModel,
    validate_system,
)
from .spectral import eigen_decompose, normalized_determinant, solve_shifted
from .systems import analytic_hugoniot, catalog_lookup

__all__ = [
    "TolerancePolicy", "entropy_dissipation", "evaluate_point", "lax_check", "lopatinski",
    "lv_conditions", "proof_diagnostics", "relative_entropy", "relative_entropy_derivative",
    "ContinuationConfig", "extend_curve", "locate_parameter", "point_at", "seed_curve",
    "trace_branches", "trace_hugoniot",
    "ConditionReport", "HugoniotCurve", "HugoniotPoint", "SpectralData", "SystemModel", "validate_system",
    "eigen_decompose", "normalized_determinant", "solve_shifted",
    "analytic_hugoniot", "catalog_lookup",
]
