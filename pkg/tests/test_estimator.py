import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from wspsdp import (
    ALNDSSolver, BruteForceSolver, ConstructionSolver, InstanceFormatError, ParameterError,
    random_small_instance, validate_solution, write_instance,
)
from wspsdp.io import instance_to_dict


@pytest.fixture
def inst():
    return random_small_instance(2, 2, 2, 2)


def test_params_round_trip_through_clone():
    est = ALNDSSolver(variant="sa", iterations=40, random_state=3)
    twin = clone(est)
    assert twin.get_params() == est.get_params()
    assert twin.search_params().iterations == 40 and twin.search_params().seed == 3


def test_fit_accepts_instance_dict_and_path(tmp_path, inst):
    path = tmp_path / "i.json"
    write_instance(inst, path)
    totals = {ALNDSSolver(iterations=60).fit(x).total_ for x in (inst, instance_to_dict(inst), path)}
    assert len(totals) == 1


@pytest.mark.parametrize("variant", ["wspsdp", "sa", "wi"])
def test_fitted_attributes(inst, variant):
    est = ALNDSSolver(variant=variant, iterations=80).fit(inst)
    assert validate_solution(inst, est.solution_, variant).feasible
    assert est.score() == -est.cost_.total
    assert est.used_warehouses_ == est.solution_.used_warehouses()


def test_heuristic_never_beats_oracle(inst):
    opt = BruteForceSolver().fit(inst)
    heur = ALNDSSolver(iterations=300).fit(inst)
    assert heur.total_ >= opt.total_ - 1e-9
    assert opt.score(inst) == -opt.total_


def test_construction_solver_exposes_trace(inst):
    est = ConstructionSolver().fit(inst)
    assert est.trace_.replay(inst).canonical() == est.solution_.canonical()


def test_unfitted_estimator_raises():
    with pytest.raises(NotFittedError):
        ALNDSSolver().score()


@pytest.mark.parametrize("seed", [-1, 1.5, True, "3"])
def test_bad_random_state_rejected(inst, seed):
    with pytest.raises(ParameterError):
        ALNDSSolver(iterations=5, random_state=seed).fit(inst)


def test_bad_input_type_rejected():
    with pytest.raises(InstanceFormatError):
        ALNDSSolver().fit([[1, 2], [3, 4]])


def test_bad_variant_rejected(inst):
    with pytest.raises(ParameterError):
        ALNDSSolver(variant="hub", iterations=5).fit(inst)
