"""Adaptive upwind wavelet collocation for 1D hyperbolic conservation laws."""

from .adaptivity import AdaptConfig, AdaptLog, adapt_step, initialize_nodes
from .discretization import FluxFunction, NonPhysicalStateError, global_lf_split, rhs
from .grid import (AdaptiveGrid, CoefficientSet, build_uniform, evaluate, forward_transform,
                   read_snapshot, threshold, write_snapshot)
from .limiter import LimiterConfig, apply_limiter, tvb_switch
from .problems import (ErrorReport, ProblemSpec, convergence_study, error_norms, list_problems,
                       make_problem)
from .reference_oracle import burgers_exact, exact_riemann, riemann_star, weno5_reference
from .time_integration import SchemeConfig, Solution, SolverError, TimeControl, solve
from .wavelet_basis import (ScalingTables, basis_pair, compute_filter_coefficients,
                            export_basis, make_basis)

__all__ = [
    "AdaptConfig", "AdaptLog", "AdaptiveGrid", "CoefficientSet", "ErrorReport", "FluxFunction",
    "LimiterConfig", "NonPhysicalStateError", "ProblemSpec", "ScalingTables", "SchemeConfig",
    "Solution", "SolverError", "TimeControl", "adapt_step", "apply_limiter", "basis_pair",
    "build_uniform", "burgers_exact", "compute_filter_coefficients", "convergence_study",
    "error_norms", "evaluate", "exact_riemann", "export_basis", "forward_transform",
    "global_lf_split", "initialize_nodes", "list_problems", "make_basis", "make_problem",
    "read_snapshot", "rhs", "riemann_star", "solve", "threshold", "tvb_switch",
    "weno5_reference", "write_snapshot",
]
