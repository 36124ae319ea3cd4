import json
import math
import random

import pytest
from hypothesis import given, strategies as st

from wspsdp import (
    AggregationError, ParameterError, SearchParams, random_small_instance, solve, write_instance,
)
from wspsdp.bench import (
    METRIC_COLUMNS, MetricsRow, capacity_series, compute_metrics, emit_report, format_table,
    read_manifest, read_report, run_manifest, run_replicated,
)
from wspsdp.exact import optimum_total

from conftest import toy_instance


# -- compute_metrics ---------------------------------------------------------------------------

def test_upper_bound_gap_published_row():
    row = compute_metrics([24398.95], ub=25848.92)
    assert row.pct_S_UB == pytest.approx(5.61, abs=0.005)


def test_baseline_gaps_published_row():
    row = compute_metrics([23597.16], [23867.31], [30031.14])
    assert row.pct_S_SA == pytest.approx(1.13, abs=0.005)
    assert row.pct_S_WI == pytest.approx(21.42, abs=0.005)


def test_equal_totals_have_zero_spread():
    row = compute_metrics([123.5] * 10)
    assert row.SD == 0.0 and row.pct_R_SD == 0.0 and row.S_best == row.S_ave == 123.5


def test_population_standard_deviation():
    row = compute_metrics([1.0, 3.0])
    assert row.SD == 1.0 and row.pct_R_SD == pytest.approx(50.0)


@pytest.mark.parametrize("bad", [[], [math.inf], [float("nan")]])
def test_bad_inputs_rejected(bad):
    with pytest.raises(AggregationError):
        compute_metrics(bad)


def test_solve_results_supply_multi_allocation_and_warehouses():
    inst = random_small_instance(2, 2, 2, 2)
    results = [solve(inst, None, SearchParams(iterations=50, seed=s)) for s in range(3)]
    row = compute_metrics(results)
    best = min(results, key=lambda r: (r.total, r.seed))
    assert row.N_M == best.n_multi_allocation
    assert row.used_warehouses == best.best_solution.used_warehouses()
    assert row.T_M == best.time_to_best


finite = st.floats(1, 1e6, allow_nan=False)


@given(st.lists(finite, min_size=1, max_size=12), st.lists(finite, min_size=1, max_size=5),
       st.lists(finite, min_size=1, max_size=5), st.randoms(use_true_random=False))
def test_metrics_permutation_invariant(tot, sa, wi, rnd):
    a = compute_metrics(tot, sa, wi)
    tot2, sa2, wi2 = tot[:], sa[:], wi[:]
    for xs in (tot2, sa2, wi2):
        rnd.shuffle(xs)
    b = compute_metrics(tot2, sa2, wi2)
    assert a.S_best == b.S_best and a.S_SA_best == b.S_SA_best and a.S_WI_best == b.S_WI_best
    assert a.S_ave == pytest.approx(b.S_ave, rel=1e-12)
    assert a.pct_R_SD == pytest.approx(b.pct_R_SD, rel=1e-9, abs=1e-9)
    assert a.S_best <= a.S_ave * (1 + 1e-12) and a.pct_R_SD >= 0


# -- run_replicated --------------------------------------------------------------------------

def test_single_replication_equals_solve():
    inst = random_small_instance(4, 2, 2, 3)
    p = SearchParams(iterations=60, seed=5)
    [res] = run_replicated(inst, None, p, 1)
    assert res.to_dict()["solution"] == solve(inst, None, p).to_dict()["solution"]
    assert res.seed == 5


def test_replications_use_consecutive_seeds_and_are_repeatable():
    inst = random_small_instance(4, 2, 2, 3)
    p = SearchParams(iterations=40, seed=10)
    a = run_replicated(inst, None, p, 3)
    b = run_replicated(inst, None, p, 3)
    assert [r.seed for r in a] == [10, 11, 12]
    assert [r.total for r in a] == [r.total for r in b]


def test_tiny_instance_replications_hit_optimum():
    for inst in (toy_instance(), random_small_instance(6, 2, 1, 2)):
        opt = optimum_total(inst)
        totals = [r.total for r in run_replicated(inst, None, SearchParams(iterations=800), 10)]
        assert all(t == pytest.approx(opt, rel=1e-9) for t in totals)


def test_zero_replications_rejected():
    with pytest.raises(ParameterError):
        run_replicated(toy_instance(), None, None, 0)


def test_construction_failures_recorded():
    from wspsdp.instance_gen import scale_capacities
    inst = scale_capacities(random_small_instance(1), 0.2)
    fails = []
    assert run_replicated(inst, None, SearchParams(iterations=5), 2, failures=fails) == []
    assert [f.seed for f in fails] == [0, 1]


# -- emit_report --------------------------------------------------------------------------------

def _rows():
    a = compute_metrics([10.0, 11.0], [10.5], [12.0], ub=10.2, instance="2-2-2-C", family="2-2-2",
                        capacity_class="C", n_nodes=6)
    b = compute_metrics([9.0], None, [9.5], instance="2-2-2-S", family="2-2-2", capacity_class="S",
                        n_nodes=6)
    c = compute_metrics([8.0], None, [8.1], instance="2-2-2-M", family="2-2-2", capacity_class="M",
                        n_nodes=6)
    a.used_warehouses = [0, 1]
    a.T_M = 0.25
    return [a, b, c]


def test_empty_report_is_header_only(tmp_path):
    paths = emit_report([], tmp_path)
    assert paths["metrics"].read_text() == ",".join(METRIC_COLUMNS) + "\n"


def test_one_row_one_line_with_blanks(tmp_path):
    row = compute_metrics([5.0], instance="x")
    paths = emit_report([row], tmp_path)
    lines = paths["metrics"].read_text().splitlines()
    assert len(lines) == 2
    cells = dict(zip(lines[0].split(","), lines[1].split(",")))
    assert cells["pct_S_UB"] == "" and cells["S_best"] == "5.0"


def test_capacity_series_ordered_by_capacity(tmp_path):
    rows = _rows()
    series = capacity_series(rows)
    assert [s[1] for s in series] == ["C", "M", "S"]
    text = emit_report(rows, tmp_path)["swi_by_capacity"].read_text().splitlines()
    assert len(text) == 4 and text[1].startswith("2-2-2,C,0.3,")


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_report_round_trip(tmp_path, fmt):
    rows = _rows()
    emit_report(rows, tmp_path, fmt)
    back = read_report(tmp_path, fmt)
    for r, s in zip(rows, back):
        for name in METRIC_COLUMNS + ("T_M",):
            x, y = getattr(r, name), getattr(s, name)
            assert (isinstance(x, float) and math.isnan(x) and math.isnan(y)) or x == y, name


def test_table_uses_two_decimals():
    text = format_table(_rows())
    assert "\t1.96\t" in text  # (10.2 - 10) / 10.2


def test_unknown_format_rejected(tmp_path):
    with pytest.raises(ParameterError):
        emit_report([], tmp_path, "xml")


# -- manifests -------------------------------------------------------------------------------------

def _manifest(tmp_path, **extra):
    write_instance(random_small_instance(2, 2, 2, 2), tmp_path / "tiny.json")
    doc = {"version": 1, "output_dir": "out", "replications": 2, "variants": ["wspsdp", "sa", "wi"],
           "params": {"iterations": 200, "seed": 0},
           "instances": [{"file": "tiny.json", "family": "tiny", "capacity_class": "L"}], **extra}
    p = tmp_path / "manifest.json"
    p.write_text(json.dumps(doc))
    return read_manifest(p)


def test_manifest_run_is_byte_identical(tmp_path):
    man = _manifest(tmp_path)
    run_manifest(man, tmp_path / "a")
    rows, paths = run_manifest(man, tmp_path / "b")
    for kind in ("metrics", "swi_by_capacity"):
        assert (tmp_path / "a" / paths[kind].name).read_bytes() == paths[kind].read_bytes()
    assert rows[0].pct_S_SA >= 0 and rows[0].pct_S_WI >= 0


def test_manifest_rejects_unknown_fields(tmp_path):
    from wspsdp import InstanceFormatError
    with pytest.raises(InstanceFormatError):
        _manifest(tmp_path, colour="blue")
