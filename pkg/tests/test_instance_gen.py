import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wspsdp import (
    InstanceFormatError, InstanceSpec, ParameterError, generate_instance, generate_synthetic_network,
    load_network, validate_instance, write_instance,
)
from wspsdp.instance_gen import CAPACITY_CLASSES, network_from_arrays


def _write_matrix(path, m):
    path.write_text("\n".join(" ".join(f"{x:g}" for x in row) for row in m) + "\n")
    return path


@pytest.fixture(scope="module")
def net81():
    return generate_synthetic_network(81, 16, 0)


def test_reference_sized_files_load(tmp_path, net81):
    d = _write_matrix(tmp_path / "d.txt", net81.distance)
    f = _write_matrix(tmp_path / "f.txt", net81.flow)
    c = tmp_path / "c.txt"
    c.write_text(" ".join(str(k) for k in net81.candidates))
    net = load_network(d, f, c)
    assert net.n_nodes == 81 and len(net.candidates) == 16


def test_one_based_candidate_ids(tmp_path):
    d = _write_matrix(tmp_path / "d.txt", np.ones((3, 3)) - np.eye(3))
    f = _write_matrix(tmp_path / "f.txt", np.zeros((3, 3)))
    c = tmp_path / "c.txt"
    c.write_text("1 3")
    assert load_network(d, f, c, one_based=True).candidates == (0, 2)


def test_non_square_matrix_rejected(tmp_path):
    d = _write_matrix(tmp_path / "d.txt", np.zeros((81, 80)))
    f = _write_matrix(tmp_path / "f.txt", np.zeros((81, 81)))
    c = tmp_path / "c.txt"
    c.write_text("0")
    with pytest.raises(InstanceFormatError, match="row 0 has 80 columns"):
        load_network(d, f, c)


def test_candidate_out_of_range_rejected():
    with pytest.raises(InstanceFormatError, match="candidate id 99"):
        network_from_arrays(np.zeros((81, 81)), np.zeros((81, 81)), [99])


def test_negative_distance_and_diagonal_flow_rejected():
    d = np.zeros((3, 3))
    d[0, 1] = -1
    with pytest.raises(InstanceFormatError, match="row 0, column 1"):
        network_from_arrays(d, np.zeros((3, 3)), [0])
    fl = np.zeros((3, 3))
    fl[2, 2] = 1
    with pytest.raises(InstanceFormatError, match="diagonal"):
        network_from_arrays(np.zeros((3, 3)), fl, [0])


@pytest.mark.parametrize("cls", sorted(CAPACITY_CLASSES))
def test_capacity_class_scales_total_demand(net81, cls):
    inst = generate_instance(net81, InstanceSpec(7, 5, 10, cls, 3))
    for cap in inst.warehouse_capacity.values():
        assert cap == pytest.approx(CAPACITY_CLASSES[cls] * inst.total_demand)


def test_cost_parameters(net81):
    inst = generate_instance(net81, InstanceSpec(5, 5, 5, "M", 1))
    assert inst.alpha == 0.001 and inst.beta == 1.0
    assert inst.name == "5-5-5-M"


def test_generation_is_byte_identical(tmp_path, net81):
    spec = InstanceSpec(7, 5, 25, "C", 9)
    write_instance(generate_instance(net81, spec), tmp_path / "a.json")
    write_instance(generate_instance(net81, spec), tmp_path / "b.json")
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_oversized_spec_rejected():
    net = generate_synthetic_network(10, 4, 0)
    with pytest.raises(ParameterError):
        generate_instance(net, InstanceSpec(3, 5, 5, "M", 0))


def test_unknown_capacity_class_rejected(net81):
    with pytest.raises(ParameterError):
        generate_instance(net81, InstanceSpec(5, 2, 2, "X", 0))


def test_synthetic_network_shape(net81):
    assert net81.distance.shape == net81.flow.shape == (81, 81)
    assert len(net81.candidates) == 16


def test_synthetic_network_triangle_inequality(net81):
    d = net81.distance
    assert np.all(d[:, None, :] <= d[:, :, None] + d[None, :, :] + 1e-9)


def test_single_node_network():
    net = generate_synthetic_network(1, 0, 5)
    assert net.n_nodes == 1 and not net.flow.any()


def test_too_many_candidates_rejected():
    with pytest.raises(ParameterError):
        generate_synthetic_network(3, 4, 0)


@given(st.integers(0, 10_000), st.sampled_from(sorted(CAPACITY_CLASSES)), st.integers(1, 8),
       st.integers(1, 12))
@settings(max_examples=25)
def test_generated_instances_are_valid(seed, cls, F, C):
    net = generate_synthetic_network(40, 16, seed % 7)
    inst = generate_instance(net, InstanceSpec(7, F, C, cls, seed))
    assert validate_instance(inst).ok
    assert all(0.1 <= a <= 0.3 for a in inst.warehouse_unit_cost.values())
    dem = [v for v in inst.node_demand.values()]
    if inst.total_demand > max(dem):
        assert max(dem) <= inst.vehicle_capacity <= inst.total_demand


@given(st.integers(0, 10_000), st.integers(1, 10), st.integers(1, 10))
@settings(max_examples=25)
def test_five_warehouses_subset_of_seven(seed, F, C):
    net = generate_synthetic_network(50, 16, seed % 5)
    w7 = generate_instance(net, InstanceSpec(7, F, C, "M", seed))
    w5 = generate_instance(net, InstanceSpec(5, F, C, "M", seed))
    label7 = {w7.nodes[w].label: w7.warehouse_unit_cost[w] for w in w7.warehouses}
    label5 = {w5.nodes[w].label: w5.warehouse_unit_cost[w] for w in w5.warehouses}
    assert set(label5) <= set(label7)
    assert all(label7[k] == a for k, a in label5.items())
