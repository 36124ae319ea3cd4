"""Exact machinery: exhaustive oracle for tiny instances and MILP export."""
from .milp import (
    MilpModel, MilpReport, Row, certify_milp_solution, expected_counts, export_milp, model_counts,
    read_lp, solution_to_values, write_lp,
)
from .oracle import brute_force_solve, optimum_total

__all__ = [
    "brute_force_solve", "optimum_total", "MilpModel", "MilpReport", "Row", "export_milp",
    "write_lp", "read_lp", "expected_counts", "model_counts", "certify_milp_solution",
    "solution_to_values",
]
