"""Estimator-style wrappers: configure in ``__init__``, solve in ``fit``.

``fit(X)`` takes an instance (Instance, document dict or file path) and
stores the outcome in trailing-underscore attributes. ``score`` returns the
negated total so that larger is better, as model-selection tools expect.
"""
from __future__ import annotations

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .alnds import SearchParams, solve
from .construction import construct_initial
from .exact import brute_force_solve
from .model import count_multi_allocation_nodes, evaluate_objective
from .validation import check_instance, check_random_state, check_variant


class _SolverMixin:
    def score(self, X=None, y=None) -> float:
        check_is_fitted(self, "cost_")
        if X is None:
            return -self.cost_.total
        inst = check_instance(X)
        return -evaluate_objective(inst, self.solution_).total

    @property
    def total_(self) -> float:
        check_is_fitted(self, "cost_")
        return self.cost_.total


class ALNDSSolver(_SolverMixin, BaseEstimator):
    """Adaptive large neighbourhood decomposition search."""

    def __init__(self, variant="wspsdp", iterations=25000, segment_length=100, sigma1=33.0,
                 sigma2=13.0, sigma3=9.0, eta=0.1, cooling_theta=0.99975,
                 tstart_worse_fraction=0.2, tstart_accept_prob=0.3,
                 destroy_fraction_range=(0.1, 0.4), min_removed=4, random_state=0):
        self.variant = variant
        self.iterations = iterations
        self.segment_length = segment_length
        self.sigma1 = sigma1
        self.sigma2 = sigma2
        self.sigma3 = sigma3
        self.eta = eta
        self.cooling_theta = cooling_theta
        self.tstart_worse_fraction = tstart_worse_fraction
        self.tstart_accept_prob = tstart_accept_prob
        self.destroy_fraction_range = destroy_fraction_range
        self.min_removed = min_removed
        self.random_state = random_state

    def search_params(self) -> SearchParams:
        p = self.get_params()
        p.pop("variant")
        p["seed"] = check_random_state(p.pop("random_state"))
        return SearchParams.from_dict(p)

    def fit(self, X, y=None):
        inst = check_instance(X)
        cfg = check_variant(self.variant)
        self.result_ = solve(inst, cfg, self.search_params())
        self.solution_ = self.result_.best_solution
        self.cost_ = self.result_.best_cost
        self.n_multi_allocation_ = self.result_.n_multi_allocation
        self.used_warehouses_ = self.solution_.used_warehouses()
        return self


class BruteForceSolver(_SolverMixin, BaseEstimator):
    """Exhaustive optimum for oracle-sized instances."""

    def __init__(self, variant="wspsdp", max_nodes=6, max_warehouses=3):
        self.variant = variant
        self.max_nodes = max_nodes
        self.max_warehouses = max_warehouses

    def fit(self, X, y=None):
        inst = check_instance(X)
        self.solution_, self.cost_ = brute_force_solve(
            inst, check_variant(self.variant), max_nodes=self.max_nodes,
            max_warehouses=self.max_warehouses)
        self.n_multi_allocation_ = count_multi_allocation_nodes(self.solution_)
        self.used_warehouses_ = self.solution_.used_warehouses()
        return self


class ConstructionSolver(_SolverMixin, BaseEstimator):
    """The greedy two-phase starting solution on its own."""

    def __init__(self, variant="wspsdp", random_state=0):
        self.variant = variant
        self.random_state = random_state

    def fit(self, X, y=None):
        inst = check_instance(X)
        self.solution_, self.trace_ = construct_initial(
            inst, check_variant(self.variant), seed=check_random_state(self.random_state))
        self.cost_ = evaluate_objective(inst, self.solution_)
        self.n_multi_allocation_ = count_multi_allocation_nodes(self.solution_)
        self.used_warehouses_ = self.solution_.used_warehouses()
        return self


__all__ = ["ALNDSSolver", "BruteForceSolver", "ConstructionSolver"]
