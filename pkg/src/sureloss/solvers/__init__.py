"""Revised simplex, affine scaling and primal-dual LP solvers."""

from .affine import affine_scaling
from .base import TRACE_HEADER, SolveOutcome, SolverOptions, Status
from .primal_dual import primal_dual
from .simplex import revised_simplex, two_phase_simplex

__all__ = [
    "SolverOptions", "SolveOutcome", "Status", "TRACE_HEADER",
    "revised_simplex", "two_phase_simplex", "affine_scaling", "primal_dual",
]
