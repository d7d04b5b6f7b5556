import csv
import json
import math
from pathlib import Path

import numpy as np
import pytest

import oracle
from measurement_uncertainty.cli import main
from measurement_uncertainty.metrics import evaluate_scenario
from measurement_uncertainty.scenario import (
    SWEEP_COLUMNS,
    ScenarioError,
    eval_number,
    scenario_from_dict,
    scenario_to_dict,
)
from measurement_uncertainty.search import random_scenario

DATA = Path(__file__).parent / "data"
GOLDEN = Path(__file__).parent / "golden"

SWEEP_HEADER = ("lambda,epsilon,eta,sigma_a,sigma_b,bar_epsilon,bar_eta,ozawa_lhs,ozawa_rhs,"
                "fujikawa_lhs,fujikawa_rhs,heisenberg_lhs,heisenberg_rhs")


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def assert_close_tree(got, want, tol, path="$"):
    if isinstance(want, dict):
        assert set(got) == set(want), path
        for k in want:
            assert_close_tree(got[k], want[k], tol, f"{path}.{k}")
    elif isinstance(want, list):
        assert len(got) == len(want), path
        for i, (g, w) in enumerate(zip(got, want)):
            assert_close_tree(g, w, tol, f"{path}[{i}]")
    elif isinstance(want, bool):
        assert got is want, path
    else:
        assert got == pytest.approx(want, abs=tol), path


def test_check_s1_golden(capsys):
    code, out, _ = run(capsys, "check", DATA / "s1.json", "--json")
    assert code == 0
    report = json.loads(out)
    assert_close_tree(report, json.loads((GOLDEN / "s1_report.json").read_text()), 1e-12)
    assert report["relations"]["heisenberg_naive"]["holds"] is False


def test_golden_report_agrees_with_oracle():
    golden = json.loads((GOLDEN / "s1_report.json").read_text())
    ref = oracle.s1_values()
    for key in ("epsilon", "eta", "sigma_a", "sigma_b", "commutator_bound",
                "out_commutator_bound", "sigma_m_out", "sigma_b_out"):
        assert golden[key] == pytest.approx(ref[key], abs=1e-12), key


def test_check_text_output(capsys):
    code, out, _ = run(capsys, "check", DATA / "s1.json")
    assert code == 0
    assert "heisenberg_naive" in out and "fails (not asserted)" in out


def test_check_trivial(capsys):
    code, out, _ = run(capsys, "check", DATA / "trivial.json", "--json")
    report = json.loads(out)
    assert code == 0
    assert report["eta"] == 0
    assert all(r["slack"] >= 0 for r in report["relations"].values())


def test_check_non_unit_state(capsys):
    code, _, err = run(capsys, "check", DATA / "bad_norm.json")
    assert code == 1
    assert "system_state" in err


def test_check_malformed_json(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "dim_system": 2,\n  oops\n}')
    code, _, err = run(capsys, "check", path)
    assert code == 1
    assert "line 3" in err


def test_check_missing_file(capsys):
    assert run(capsys, "check", "/nonexistent/scenario.json")[0] == 1


def test_check_violation_exit_code(tmp_path, capsys, monkeypatch):
    # a report with a failing asserted relation must map to exit 2
    import measurement_uncertainty.cli as cli
    from measurement_uncertainty.metrics import Relation

    real = cli.evaluate_scenario

    def broken(scn):
        rep = real(scn)
        bad = Relation("ozawa", 0.0, 1.0, -1.0, False, True)
        return type(rep)(**{**rep.__dict__, "relations": (bad,) + rep.relations[1:]})

    monkeypatch.setattr(cli, "evaluate_scenario", broken)
    assert run(capsys, "check", DATA / "s1.json")[0] == 2


def test_sweep_golden(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    code, _, _ = run(capsys, "sweep", DATA / "lambda_sweep.json", "--out", out)
    assert code == 0
    text = out.read_text()
    assert text.splitlines()[0] == SWEEP_HEADER
    assert text.splitlines()[0] == (GOLDEN / "lambda_sweep.csv").read_text().splitlines()[0]
    got = list(csv.reader(text.splitlines()))[1:]
    want = list(csv.reader((GOLDEN / "lambda_sweep.csv").read_text().splitlines()))[1:]
    assert len(got) == len(want) == 11
    np.testing.assert_allclose(np.array(got, float), np.array(want, float), atol=1e-9, rtol=0)


def test_sweep_endpoint_matches_s1(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    run(capsys, "sweep", DATA / "lambda_sweep.json", "--out", out)
    rows = list(csv.DictReader(out.read_text().splitlines()))
    last = rows[-1]
    assert float(last["lambda"]) == 1
    expect = {"epsilon": 0, "eta": math.sqrt(2), "sigma_a": 1, "sigma_b": 1, "bar_epsilon": 1,
              "bar_eta": 1 + math.sqrt(2), "ozawa_lhs": math.sqrt(2), "ozawa_rhs": 1,
              "fujikawa_lhs": 1 + math.sqrt(2), "fujikawa_rhs": 2,
              "heisenberg_lhs": 0, "heisenberg_rhs": 1}
    for k, v in expect.items():
        assert float(last[k]) == pytest.approx(v, abs=1e-9), k


def test_sweep_single_step_matches_check(tmp_path, capsys):
    cfg = json.loads((DATA / "lambda_sweep.json").read_text())
    cfg["sweep"][0].update(min=1, max=1, steps=1)
    path = tmp_path / "one.json"
    path.write_text(json.dumps(cfg))
    out = tmp_path / "one.csv"
    assert run(capsys, "sweep", path, "--out", out)[0] == 0
    rows = list(csv.DictReader(out.read_text().splitlines()))
    assert len(rows) == 1
    _, report_text, _ = run(capsys, "check", DATA / "s1.json", "--json")
    report = json.loads(report_text)
    for col in ("epsilon", "eta", "sigma_a", "sigma_b", "bar_epsilon", "bar_eta"):
        assert float(rows[0][col]) == pytest.approx(report[col], abs=1e-11)


def test_theta_sweep_contains_violation(tmp_path, capsys):
    out = tmp_path / "theta.csv"
    assert run(capsys, "sweep", DATA / "theta_sweep.json", "--out", out)[0] == 0
    rows = list(csv.DictReader(out.read_text().splitlines()))
    assert any(float(r["heisenberg_lhs"]) < float(r["heisenberg_rhs"]) for r in rows)


def test_two_parameter_sweep(tmp_path, capsys):
    cfg = json.loads((DATA / "lambda_sweep.json").read_text())
    cfg["sweep"].append({"parameter": "theta_psi", "min": 0, "max": "pi", "steps": 3})
    del cfg["fixed"]["theta_psi"]
    path = tmp_path / "two.json"
    path.write_text(json.dumps(cfg))
    out = tmp_path / "two.csv"
    assert run(capsys, "sweep", path, "--out", out)[0] == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("lambda,theta_psi,epsilon")
    assert len(lines) == 1 + 33


def test_sweep_empty_grid(tmp_path, capsys):
    cfg = json.loads((DATA / "lambda_sweep.json").read_text())
    cfg["sweep"][0]["steps"] = 0
    path = tmp_path / "empty.json"
    path.write_text(json.dumps(cfg))
    code, _, err = run(capsys, "sweep", path, "--out", tmp_path / "x.csv")
    assert code == 1
    assert "steps" in err


def test_fuzz_cli(capsys):
    code, out, _ = run(capsys, "fuzz", "--count", 200, "--dims", "2x2,2x3", "--seed", 42)
    assert code == 0
    summary = json.loads(out)
    assert summary["failures"] == []
    assert summary["scenarios_run"] >= 400


@pytest.mark.parametrize("argv", [
    ["fuzz", "--count", "0", "--dims", "2x2", "--seed", "1"],
    ["fuzz", "--count", "5", "--dims", "2by2", "--seed", "1"],
    ["fuzz", "--count", "5", "--dims", "1x2", "--seed", "1"],
    ["fuzz", "--count", "5", "--dims", "2x2"],
    ["search", "--relation", "nope", "--budget", "10", "--seed", "1"],
    ["search", "--relation", "ozawa", "--budget", "0", "--seed", "1"],
    ["bogus"],
])
def test_bad_flags_exit_one(argv, capsys):
    assert main(argv) == 1


def test_search_cli(capsys):
    code, out, _ = run(capsys, "search", "--relation", "heisenberg_naive",
                       "--budget", 2000, "--seed", 7)
    assert code == 0
    assert json.loads(out)["objective_value"] <= -0.5


def test_search_cli_universal(capsys):
    code, out, _ = run(capsys, "search", "--relation", "robertson_out", "--budget", 400, "--seed", 1)
    assert code == 0
    assert json.loads(out)["objective_value"] >= -1e-9


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("dims", [(2, 2), (3, 2)])
def test_scenario_round_trip(seed, dims):
    scn = random_scenario(*dims, seed)
    back = scenario_from_dict(json.loads(json.dumps(scenario_to_dict(scn))))
    a, b = evaluate_scenario(scn).to_dict(), evaluate_scenario(back).to_dict()
    assert_close_tree(b, a, 1e-12)


@pytest.mark.parametrize("patch, field", [
    ({"a_spec": [[[1, 0], [0, 1]], [[0, 0], [1, 0]]]}, "a_spec"),
    ({"unitary_spec": "partial(2, 0, 0)"}, "unitary_spec"),
    ({"unitary_spec": [[[2, 0]] * 4] * 4}, "unitary_spec"),
    ({"b_spec": "spin(1)"}, "b_spec"),
    ({"meter_spec": "warp"}, "meter_spec"),
    ({"apparatus_state": "basis(5)"}, "apparatus_state"),
    ({"dim_system": 0}, "dim_system"),
    ({"extra": 1}, "extra"),
])
def test_scenario_diagnostics(patch, field):
    data = json.loads((DATA / "s1.json").read_text())
    data.update(patch)
    with pytest.raises(ScenarioError) as info:
        scenario_from_dict(data)
    assert info.value.field == field


def test_eval_number():
    assert eval_number("pi/2") == math.pi / 2
    assert eval_number("-2*pi + 1") == -2 * math.pi + 1
    assert eval_number(3) == 3.0
    with pytest.raises(ValueError):
        eval_number("__import__('os')")


def test_sweep_header_constant():
    assert ",".join(SWEEP_COLUMNS) == SWEEP_HEADER.split(",", 1)[1]
