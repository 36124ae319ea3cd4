import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wspsdp import (
    InstanceFormatError, SearchParams, construct_initial, random_small_instance, read_instance,
    read_solution, solve, write_instance, write_solution,
)
from wspsdp.io import instance_from_dict, instance_to_dict, solution_from_dict, solution_to_dict


@given(st.integers(0, 5000), st.sampled_from([(2, 2, 2), (3, 3, 4)]))
@settings(max_examples=20)
def test_instance_round_trip(seed, shape):
    inst = random_small_instance(seed, *shape)
    back = instance_from_dict(json.loads(json.dumps(instance_to_dict(inst))))
    assert back.nodes == inst.nodes and back.name == inst.name
    assert np.array_equal(back.distance, inst.distance) and np.array_equal(back.flow, inst.flow)
    assert back.warehouse_capacity == inst.warehouse_capacity
    assert back.warehouse_unit_cost == inst.warehouse_unit_cost
    assert (back.vehicle_capacity, back.alpha, back.beta) == (inst.vehicle_capacity, inst.alpha, inst.beta)


@given(st.integers(0, 5000), st.sampled_from(["wspsdp", "sa", "wi"]))
@settings(max_examples=20)
def test_solution_round_trip(seed, variant):
    inst = random_small_instance(seed, 3, 3, 3)
    sol, _ = construct_initial(inst, variant)
    assert solution_from_dict(json.loads(json.dumps(solution_to_dict(sol)))) == sol.canonical()


def test_files_round_trip(tmp_path):
    inst = random_small_instance(1, 2, 3, 3)
    write_instance(inst, tmp_path / "i.json")
    res = solve(inst, None, SearchParams(iterations=30))
    write_solution(res.best_solution, tmp_path / "s.json")
    (tmp_path / "r.json").write_text(json.dumps(res.to_dict()))
    assert read_instance(tmp_path / "i.json").name == inst.name
    assert read_solution(tmp_path / "s.json") == res.best_solution.canonical()
    # solve output files wrap the solution
    assert read_solution(tmp_path / "r.json") == res.best_solution.canonical()


def test_unknown_version_rejected():
    doc = instance_to_dict(random_small_instance(0))
    doc["version"] = 2
    with pytest.raises(InstanceFormatError, match="version"):
        instance_from_dict(doc)


def test_malformed_documents_rejected(tmp_path):
    doc = instance_to_dict(random_small_instance(0))
    del doc["warehouses"]
    with pytest.raises(InstanceFormatError):
        instance_from_dict(doc)
    (tmp_path / "bad.json").write_text("{not json")
    with pytest.raises(InstanceFormatError):
        read_instance(tmp_path / "bad.json")
