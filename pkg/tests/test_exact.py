import itertools
import math
from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from wspsdp import (
    AssignmentError, EnumerationSizeError, InfeasibleError, Route, RouteKind, Solution, SubNode,
    brute_force_solve, certify_milp_solution, evaluate_objective, export_milp, random_small_instance,
    solution_to_values, validate_solution,
)
from wspsdp.exact import expected_counts, model_counts, optimum_total, read_lp, write_lp
from wspsdp.instance_gen import scale_capacities

from conftest import C, F, W, make_instance, toy_instance

VARIANTS = ("wspsdp", "sa", "wi")


# -- independent oracle: enumerate solutions in the model representation ---------------------

def _ordered_partitions(items):
    """Every way to split ``items`` into an unordered set of ordered routes."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for k in range(len(rest) + 1):
        for others in itertools.combinations(rest, k):
            remaining = [x for x in rest if x not in others]
            for perm in itertools.permutations((first, *others)):
                for tail in _ordered_partitions(remaining):
                    yield [list(perm)] + tail


def enumerate_optimum(inst, variant):
    """Minimum total over every solution accepted by validate_solution."""
    comms = inst.commodities
    whs = inst.warehouses
    best = math.inf
    for pairs in itertools.product(itertools.product(whs, whs), repeat=len(comms)):
        assignment = dict(zip(comms, pairs))
        groups = {}
        for (i, j), (m, n) in assignment.items():
            groups.setdefault((m, RouteKind.COLLECTION), {}).setdefault(i, set()).add((i, j))
            groups.setdefault((n, RouteKind.DELIVERY), {}).setdefault(j, set()).add((i, j))
        keys = sorted(groups, key=lambda k: (k[0], k[1].value))
        options = [list(_ordered_partitions(sorted(groups[k]))) for k in keys]
        for choice in itertools.product(*options):
            routes = []
            for (w, kind), parts in zip(keys, choice):
                for part in parts:
                    routes.append(Route(w, kind, tuple(SubNode(v, w, groups[(w, kind)][v]) for v in part)))
            sol = Solution(routes, assignment)
            if validate_solution(inst, sol, variant).feasible:
                best = min(best, evaluate_objective(inst, sol).total)
    return best


# -- brute_force_solve ---------------------------------------------------------------------

@pytest.mark.parametrize("variant", VARIANTS)
def test_toy_optimum_is_identical_for_all_variants(variant):
    sol, cost = brute_force_solve(toy_instance(), variant)
    assert cost.total == pytest.approx(16.0)


@pytest.mark.parametrize("seed", range(6))
def test_general_model_dominates_baselines(seed):
    inst = random_small_instance(seed, 2, 2, 2, capacity_class="S")
    opt = {v: optimum_total(inst, v) for v in VARIANTS}
    assert opt["wspsdp"] <= opt["sa"] and opt["wspsdp"] <= opt["wi"]


@pytest.mark.parametrize("seed", range(8))
def test_oracle_matches_independent_enumeration(seed):
    inst = random_small_instance(seed, 2, 2, 2, capacity_class=["S", "M"][seed % 2], max_commodities=3)
    for variant in VARIANTS:
        ours = optimum_total(inst, variant)
        ref = enumerate_optimum(inst, variant)
        assert ours == pytest.approx(ref, rel=1e-9) if math.isfinite(ref) else ours == math.inf


@pytest.mark.parametrize("variant", VARIANTS)
def test_oracle_solution_is_feasible(variant):
    inst = random_small_instance(4, 3, 3, 3, capacity_class="S", max_commodities=5)
    sol, cost = brute_force_solve(inst, variant)
    assert validate_solution(inst, sol, variant).feasible
    assert evaluate_objective(inst, sol) == cost


def test_size_guard():
    inst = random_small_instance(0, 2, 4, 4)
    with pytest.raises(EnumerationSizeError):
        brute_force_solve(inst)


def test_infeasible_instance_reports_binding_capacity():
    inst = scale_capacities(random_small_instance(1, 2, 2, 2), 0.2)
    with pytest.raises(InfeasibleError) as err:
        brute_force_solve(inst)
    assert err.value.binding == "warehouse capacity"


@given(st.integers(0, 2000), st.sampled_from(VARIANTS))
@settings(max_examples=15)
def test_larger_capacities_never_cost_more(seed, variant):
    inst = random_small_instance(seed, 2, 2, 3, max_commodities=5)
    totals = [optimum_total(scale_capacities(inst, m), variant) for m in (0.3, 0.5, 0.7, 2.0)]
    assert all(b <= a for a, b in zip(totals, totals[1:]))
    bigger = replace(inst, vehicle_capacity=inst.vehicle_capacity * 1.5)
    assert optimum_total(bigger, variant) <= optimum_total(inst, variant)


# -- MILP export ------------------------------------------------------------------------------

def test_counts_single_node_of_each_kind():
    model, _ = export_milp(toy_instance())
    counts = model_counts(model)["variables"]
    assert counts["z"] == 1 and counts["x"] == 9


def test_counts_two_of_each_kind():
    inst = random_small_instance(0, 2, 2, 2)
    counts = model_counts(export_milp(inst)[0])
    assert counts["variables"]["z"] == 16
    K, A = len(inst.commodities), sum(1 for v in inst.node_demand.values() if v > 0)
    assert counts == expected_counts(2, 2, 2, n_commodities=K, n_active=A)


@given(st.integers(0, 500), st.sampled_from([(1, 1, 2), (2, 2, 2), (3, 2, 3), (2, 3, 1)]),
       st.sampled_from(VARIANTS))
@settings(max_examples=20)
def test_counts_match_closed_form(seed, shape, variant):
    inst = random_small_instance(seed, *shape)
    K = len(inst.commodities)
    A = sum(1 for v in inst.node_demand.values() if v > 0)
    model, _ = export_milp(inst, variant)
    assert model_counts(model) == expected_counts(len(inst.factories), len(inst.customers),
                                                  len(inst.warehouses), n_commodities=K, n_active=A,
                                                  variant=variant)


def test_big_m_constants():
    model, text = export_milp(random_small_instance(2, 2, 3, 2))
    assert model.big_m == {"7": 2, "8": 3}


@pytest.mark.parametrize("variant", VARIANTS)
def test_lp_text_round_trip(variant):
    inst = random_small_instance(5, 2, 2, 3)
    model, text = export_milp(inst, variant)
    again = read_lp(text)
    assert write_lp(again) == text
    assert again.variables == model.variables and again.binaries == model.binaries
    assert [(r.name, r.sense, r.rhs) for r in again.rows] == [(r.name, r.sense, r.rhs) for r in model.rows]


def test_lp_sections_and_names():
    text = export_milp(toy_instance())[1]
    for section in ("Minimize", "Subject To", "Bounds", "Binaries", "End"):
        assert section in text
    assert "x_0_1_0" in text and "z_1_2_0_0" in text and "u_1_0" in text and "v_2_0" in text


def test_all_zero_assignment_violates_coverage():
    model, _ = export_milp(random_small_instance(0, 2, 2, 2))
    rep = certify_milp_solution(model, dict.fromkeys(model.variables, 0.0))
    assert rep.by_family().get("c2", 0) == len([r for r in model.rows if r.family == "c2"])


def test_missing_variable_raises():
    model, _ = export_milp(toy_instance())
    with pytest.raises(AssignmentError):
        certify_milp_solution(model, {})


@pytest.mark.parametrize("variant", VARIANTS)
def test_oracle_assignment_certifies(variant):
    inst = random_small_instance(3, 2, 2, 2, capacity_class="L")
    sol, cost = brute_force_solve(inst, variant)
    model, _ = export_milp(inst, variant)
    rep = certify_milp_solution(model, solution_to_values(inst, sol, variant))
    assert rep.ok, rep.violations[:5]
    assert rep.objective == pytest.approx(cost.total, rel=1e-9)


def test_perturbing_one_z_only_moves_rows_containing_it():
    inst = random_small_instance(3, 2, 2, 2, capacity_class="S")
    sol, _ = brute_force_solve(inst)
    model, _ = export_milp(inst)
    vals = solution_to_values(inst, sol)
    (i, j), (m, n) = sorted(sol.assignment.items())[0]
    key = f"z_{i}_{j}_{m}_{n}"
    before = certify_milp_solution(model, vals)
    vals[key] += 0.1
    after = certify_milp_solution(model, vals)
    changed = {r for r in before.slacks if not math.isclose(before.slacks[r], after.slacks[r], abs_tol=1e-12)}
    touching = {r.name for r in model.rows if key in r.coeffs}
    assert changed == touching
    assert f"c2_{i}_{j}" in changed and f"c3_{m}" in changed
    violated = {name for name, _ in after.violations}
    assert f"c2_{i}_{j}" in violated and violated <= touching


def test_row_twelve_relaxed_on_unused_arcs():
    inst = random_small_instance(0, 2, 2, 2)
    sol, _ = brute_force_solve(inst)
    model, _ = export_milp(inst)
    rep = certify_milp_solution(model, solution_to_values(inst, sol))
    assert all(rep.slacks[r.name] >= -1e-6 for r in model.rows if r.family == "c12")
