"""Staggered (coinless) quantum-walk search on two-dimensional torus grids."""

from .analytic import AnalyticReport, analytic_report, compute_alpha, solve_alpha_exact
from .errors import (
    BudgetExceededError,
    GridMismatchError,
    LowConfidenceError,
    NumericalError,
    ParityError,
    SizeCapError,
)
from .estimation import RunResult, dense_spectrum, dense_unitary, estimate_alpha_from_series, find_t_star
from .grid import GridSpec, StateVector, basis_state, inner_product, uniform_state
from .harness import ScalingRow, amplify_simulated, emit, sweep
from .spectral import FourierBlock, build_reduced, decompose_psi1
from .walk import run, step

__version__ = "0.1.0"

__all__ = [
    "AnalyticReport",
    "BudgetExceededError",
    "FourierBlock",
    "GridMismatchError",
    "GridSpec",
    "LowConfidenceError",
    "NumericalError",
    "ParityError",
    "RunResult",
    "ScalingRow",
    "SizeCapError",
    "StateVector",
    "amplify_simulated",
    "analytic_report",
    "basis_state",
    "build_reduced",
    "compute_alpha",
    "decompose_psi1",
    "dense_spectrum",
    "dense_unitary",
    "emit",
    "estimate_alpha_from_series",
    "find_t_star",
    "inner_product",
    "run",
    "solve_alpha_exact",
    "step",
    "sweep",
    "uniform_state",
]
