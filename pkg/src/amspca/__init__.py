"""Sparse PCA by alternating maximization, for eight formulations."""

from .formulations import Formulation, merit, objective, x_step, y_step
from .matrix import DataMatrix, center_columns, load_matrix, mult, mult_t
from .multistart import MultiStartPlan, MultiStartReport, run_multistart, sweep_stats
from .solver import RunResult, SolverConfig, am_solve, am_solve_batch, generate_start

__version__ = "0.1.0"

__all__ = [
    "DataMatrix",
    "Formulation",
    "MultiStartPlan",
    "MultiStartReport",
    "RunResult",
    "SolverConfig",
    "am_solve",
    "am_solve_batch",
    "center_columns",
    "generate_start",
    "load_matrix",
    "merit",
    "mult",
    "mult_t",
    "objective",
    "run_multistart",
    "sweep_stats",
    "x_step",
    "y_step",
]
