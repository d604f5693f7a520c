"""Numerical boundary layers for multistep finite-difference transport schemes."""

from .scheme import (
    SchemeError,
    SchemeSpec,
    ConsistencyReport,
    builtin_scheme,
    check_consistency,
    flux_coefficients,
    load_scheme,
    scheme_names,
)
from .symbol import (
    AssumptionReport,
    SymbolAnalysis,
    amplification,
    analyze,
    cauchy_stability,
    check_assumptions,
    circle_roots,
    contour_root_count,
    disk_roots,
    stability_region_probe,
    MultistepPolynomials,
)
from .boundary_layer import BoundaryLayerProfile, build_corrector, build_profile, evaluate
from .simulator import (
    Grid,
    GridSolution,
    approximate_solution,
    convergence_study,
    error_norms,
    exact_interior,
    initial_levels,
    run,
    step,
    trace_average,
    weighted_norms,
)

__version__ = "0.1.0"
