"""Adaptive large neighbourhood decomposition search driver."""
from __future__ import annotations

import random
import time
from dataclasses import dataclass, field

from ..construction import construct_initial
from ..exceptions import RepairError
from ..model import (
    CostBreakdown, Instance, Solution, VariantConfig, count_multi_allocation_nodes,
    evaluate_objective, validate_solution,
)
from .mechanics import OperatorBank, SearchParams, accept, initial_temperature, update_weights
from .operators import (
    DESTROY_OPERATORS, REPAIR_OPERATORS, SUBPROBLEMS, destroy_state, destroys_for, repair_state,
)
from .local import improve_routes
from .state import Context, SearchState

_REL_EPS = 1e-12
T_FLOOR_FRACTION = 1e-10


@dataclass
class SolveResult:
    best_solution: Solution
    best_cost: CostBreakdown
    cost_trajectory: list
    elapsed_seconds: float
    operator_stats: dict
    n_multi_allocation: int
    seed: int = 0
    variant: str = "wspsdp"
    time_to_best: float = 0.0
    initial_cost: float = 0.0
    accepted: int = 0
    extras: dict = field(default_factory=dict)

    @property
    def total(self) -> float:
        return self.best_cost.total

    def to_dict(self, *, trajectory: bool = True) -> dict:
        from ..io import solution_to_dict

        c = self.best_cost
        doc = {
            "version": 1,
            "variant": self.variant,
            "seed": self.seed,
            "total": c.total,
            "cost": {"variable": c.variable_cost, "local_tour": c.local_tour_cost,
                     "inter_warehouse": c.inter_warehouse_cost},
            "initial_cost": self.initial_cost,
            "n_multi_allocation": self.n_multi_allocation,
            "used_warehouses": self.best_solution.used_warehouses(),
            "accepted": self.accepted,
            "elapsed_seconds": self.elapsed_seconds,
            "time_to_best": self.time_to_best,
            "operator_stats": self.operator_stats,
            "solution": solution_to_dict(self.best_solution),
        }
        if trajectory:
            doc["cost_trajectory"] = list(self.cost_trajectory)
        return doc


def _better(a, b):
    return a < b - _REL_EPS * abs(b)


def solve(inst: Instance, cfg=None, params: SearchParams | None = None, *,
          initial: Solution | None = None, check_feasibility: bool = False) -> SolveResult:
    """Run the search from the construction solution.

    ``check_feasibility`` re-certifies every accepted solution with
    ``validate_solution`` (slow; meant for tests).
    """
    cfg = VariantConfig.of(cfg)
    params = params or SearchParams()
    t0 = time.perf_counter()
    rng = random.Random(params.seed)
    if initial is None:
        initial, _ = construct_initial(inst, cfg, seed=params.seed)
    ctx = Context(inst, cfg)
    cur = SearchState.from_solution(ctx, initial)
    cur_cost = cur.cost()
    best, best_cost = cur, cur_cost
    time_to_best = 0.0

    destroy_names = [o for o in DESTROY_OPERATORS if not (cfg.single_allocation and o == "duplication")]
    bank = OperatorBank.create(SUBPROBLEMS, destroy_names, REPAIR_OPERATORS)
    allowed = {sp: destroys_for(sp, cfg) for sp in SUBPROBLEMS}
    T = initial_temperature(cur_cost, params.tstart_worse_fraction, params.tstart_accept_prob) \
        if cur_cost > 0 else 1.0
    T_floor = T * T_FLOOR_FRACTION
    lo, hi = params.destroy_fraction_range
    s1, s2, s3 = params.sigma1, params.sigma2, params.sigma3
    trajectory = []
    n_accepted = 0

    for it in range(params.iterations):
        sp = bank.select("subproblem", rng)
        dname = bank.select("destroy", rng, among=allowed[sp])
        rname = bank.select("repair", rng)
        degree = lo + (hi - lo) * rng.random()
        score = 0.0
        part = destroy_state(cur.copy(), dname, degree, rng, mode=sp, min_removed=params.min_removed)
        if not part.noop:
            try:
                cand = repair_state(part, rname, rng)
            except RepairError:
                cand = None
            if cand is not None:
                improve_routes(cand)
                c = cand.cost()
                if _better(c, best_cost):
                    score = s1
                    cur, cur_cost = cand, c
                    best, best_cost = cand, c
                    time_to_best = time.perf_counter() - t0
                    n_accepted += 1
                elif _better(c, cur_cost):
                    score = s2
                    cur, cur_cost = cand, c
                    n_accepted += 1
                elif accept(c, cur_cost, T, rng):
                    if _better(cur_cost, c):
                        score = s3
                    cur, cur_cost = cand, c
                    n_accepted += 1
                else:
                    cand = None
                if cand is not None and check_feasibility:
                    sol = cand.to_solution()
                    for variant in {cfg, VariantConfig()}:
                        rep = validate_solution(inst, sol, variant)
                        if not rep.feasible:
                            raise AssertionError(f"accepted infeasible solution: {rep.messages()}")
        bank.credit("subproblem", sp, score)
        bank.credit("destroy", dname, score)
        bank.credit("repair", rname, score)
        T = max(T * params.cooling_theta, T_floor)
        trajectory.append(best_cost)
        if (it + 1) % params.segment_length == 0:
            update_weights(bank, params.eta)

    best_sol = best.to_solution()
    return SolveResult(
        best_solution=best_sol,
        best_cost=evaluate_objective(inst, best_sol),
        cost_trajectory=trajectory,
        elapsed_seconds=time.perf_counter() - t0,
        operator_stats=bank.stats(),
        n_multi_allocation=count_multi_allocation_nodes(best_sol),
        seed=params.seed,
        variant=cfg.variant.value,
        time_to_best=time_to_best,
        initial_cost=evaluate_objective(inst, initial).total,
        accepted=n_accepted,
    )
