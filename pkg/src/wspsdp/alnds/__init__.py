from .mechanics import (
    OperatorBank, SearchParams, accept, initial_temperature, select_weighted, update_weights,
)
from .operators import (
    DESTROY_OPERATORS, REPAIR_OPERATORS, SUBPROBLEMS, PartialSolution, apply_destroy, apply_repair,
    regret_choice,
)
from .search import SolveResult, solve

__all__ = [
    "OperatorBank", "SearchParams", "accept", "initial_temperature", "select_weighted",
    "update_weights", "DESTROY_OPERATORS", "REPAIR_OPERATORS", "SUBPROBLEMS", "PartialSolution",
    "apply_destroy", "apply_repair", "regret_choice", "SolveResult", "solve",
]
