"""Numerical toolkit for degenerate elliptic problems with gradient absorption."""

from .errors import (ConfigError, ErgodicPDEError, HypothesisUnmet, LadderNotSettled,
                     LadderUnstable, NotConverged, ParameterError, SolverError,
                     WindowTooNarrow)
from .model import (Domain1D, EquationParams, Exponents, Forcing, boundary_constant,
                    compute_exponents, eval_F, uniqueness_status, validate_params)
from .grid import Boundary, Grid, GridField, discrete_G
from .solve import RSchedule, solve_dirichlet, solve_explosive
from .barriers import BarrierSpec, check_inequality
from .ergodic import (LambdaSchedule, estimate_constant_dirichlet,
                      estimate_constant_explosive)
from .verify import (check_comparison, check_gradient_bound, domain_monotonicity,
                     fit_boundary_rate, mu_star_upper_bound)

__all__ = [
    "ConfigError", "ErgodicPDEError", "HypothesisUnmet", "LadderNotSettled", "LadderUnstable",
    "NotConverged", "ParameterError", "SolverError", "WindowTooNarrow",
    "Domain1D", "EquationParams", "Exponents", "Forcing", "boundary_constant",
    "compute_exponents", "eval_F", "uniqueness_status", "validate_params",
    "Boundary", "Grid", "GridField", "discrete_G",
    "RSchedule", "solve_dirichlet", "solve_explosive",
    "BarrierSpec", "check_inequality",
    "LambdaSchedule", "estimate_constant_dirichlet", "estimate_constant_explosive",
    "check_comparison", "check_gradient_bound", "domain_monotonicity", "fit_boundary_rate",
    "mu_star_upper_bound",
]

__version__ = "0.1.0"
