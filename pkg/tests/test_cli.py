import json

import pytest

from wspsdp import random_small_instance, write_instance
from wspsdp.cli import main


@pytest.fixture
def tiny(tmp_path):
    p = tmp_path / "tiny.json"
    write_instance(random_small_instance(3, 2, 2, 2), p)
    return p


def _run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_generate_then_validate(tmp_path, capsys):
    inst = tmp_path / "g.json"
    code, _, _ = _run(["generate", "--warehouses", 5, "--factories", 3, "--customers", 4, "--nodes", 30,
                       "--candidates", 8, "--capacity-class", "S", "--seed", 2, "--out", inst], capsys)
    assert code == 0
    code, out, _ = _run(["validate", "--instance", inst], capsys)
    assert code == 0 and json.loads(out)["instance_ok"] is True


def test_generate_is_deterministic(tmp_path, capsys):
    argv = ["generate", "--small", "--warehouses", 2, "--factories", 2, "--customers", 3, "--seed", 4]
    _, a, _ = _run(argv, capsys)
    _, b, _ = _run(argv, capsys)
    assert a == b and json.loads(a)["version"] == 1


def test_oracle_then_certify_against_export(tmp_path, tiny, capsys):
    sol, lp = tmp_path / "opt.json", tmp_path / "model.lp"
    assert _run(["oracle", "--instance", tiny, "--out", sol], capsys)[0] == 0
    assert _run(["export-milp", "--instance", tiny, "--out", lp], capsys)[0] == 0
    code, out, _ = _run(["certify", "--lp", lp, "--instance", tiny, "--solution", sol], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["violations"] == 0
    assert rep["objective"] == pytest.approx(json.loads(sol.read_text())["total"], rel=1e-9)


def test_solve_writes_result(tmp_path, tiny, capsys):
    out = tmp_path / "res.json"
    code, _, _ = _run(["solve", "--instance", tiny, "--variant", "wi", "--seed", 3, "--iterations", 50,
                       "--out", out], capsys)
    doc = json.loads(out.read_text())
    assert code == 0 and doc["variant"] == "wi" and doc["seed"] == 3
    assert len(doc["cost_trajectory"]) == 50
    code, rep, _ = _run(["validate", "--instance", tiny, "--variant", "wi", "--solution", out], capsys)
    assert code == 0 and json.loads(rep)["feasible"]


def test_bench_on_three_variants(tmp_path, tiny, capsys):
    man = tmp_path / "m.json"
    man.write_text(json.dumps({"version": 1, "replications": 2, "params": {"iterations": 150},
                               "instances": [{"file": tiny.name}]}))
    code, out, _ = _run(["bench", "--manifest", man, "--out", tmp_path / "res", "--jobs", 1], capsys)
    assert code == 0
    head, row = out.splitlines()[:2]
    cells = dict(zip(head.split("\t"), row.split("\t")))
    assert float(cells["%S_SA"]) >= 0 and float(cells["%S_WI"]) >= 0
    assert (tmp_path / "res" / "metrics.csv").exists()


def test_infeasible_solution_exits_one(tmp_path, tiny, capsys):
    sol = tmp_path / "empty.json"
    sol.write_text(json.dumps({"version": 1, "routes": [], "assignment": []}))
    code, out, _ = _run(["validate", "--instance", tiny, "--solution", sol], capsys)
    assert code == 1 and json.loads(out)["feasible"] is False


def test_missing_file_is_usage_error(tmp_path, capsys):
    code, _, err = _run(["validate", "--instance", tmp_path / "nope.json"], capsys)
    assert code == 2 and err.startswith("error: FileNotFoundError:")


def test_malformed_input_is_usage_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"version": 7}')
    code, _, err = _run(["oracle", "--instance", bad], capsys)
    assert code == 2 and err.startswith("error: InstanceFormatError:")


def test_unknown_flag_exits_nonzero(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["solve", "--bogus"])
    assert exc.value.code != 0


def test_inputs_not_mutated(tmp_path, tiny, capsys):
    before = tiny.read_bytes()
    _run(["solve", "--instance", tiny, "--iterations", 10], capsys)
    _run(["export-milp", "--instance", tiny], capsys)
    assert tiny.read_bytes() == before
