"""Warehouse sharing platform system design: models, heuristics and exact tools."""
from .alnds import SearchParams, SolveResult, solve
from .bench import MetricsRow, compute_metrics, emit_report, read_report, run_replicated
from .construction import ConstructionTrace, construct_initial
from .estimator import ALNDSSolver, BruteForceSolver, ConstructionSolver
from .exact import brute_force_solve, certify_milp_solution, export_milp, solution_to_values
from .exceptions import (
    AggregationError, AssignmentError, ConstructionError, EnumerationSizeError, InfeasibleError,
    InstanceFormatError, ModelInconsistencyError, ParameterError, RepairError, WSPSError,
)
from .instance_gen import (
    InstanceSpec, NetworkData, generate_instance, generate_synthetic_network, load_network,
    random_small_instance,
)
from .io import read_instance, read_solution, write_instance, write_solution
from .model import (
    CostBreakdown, Instance, Node, Role, Route, RouteKind, Solution, SubNode, Variant, VariantConfig,
    evaluate_objective, is_feasible, validate_instance, validate_solution,
)

__version__ = "0.1.0"

__all__ = [
    "SearchParams", "SolveResult", "solve", "MetricsRow", "compute_metrics", "emit_report",
    "read_report", "run_replicated", "ConstructionTrace", "construct_initial", "ALNDSSolver",
    "BruteForceSolver", "ConstructionSolver", "brute_force_solve", "certify_milp_solution",
    "export_milp", "solution_to_values", "AggregationError", "AssignmentError", "ConstructionError",
    "EnumerationSizeError", "InfeasibleError", "InstanceFormatError", "ModelInconsistencyError",
    "ParameterError", "RepairError", "WSPSError", "InstanceSpec", "NetworkData", "generate_instance",
    "generate_synthetic_network", "load_network", "random_small_instance", "read_instance",
    "read_solution", "write_instance", "write_solution", "CostBreakdown", "Instance", "Node", "Role",
    "Route", "RouteKind", "Solution", "SubNode", "Variant", "VariantConfig", "evaluate_objective",
    "is_feasible", "validate_instance", "validate_solution",
]
