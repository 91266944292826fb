"""The command-line surface and its exit codes."""

import json

import pytest

from nearopt.cli import main

from test_modelio import MIN_SUM_DOC


def run(tmp_path, *args):
    return main(["--out", str(tmp_path / "out"), *args])


def test_solve_fixture(tmp_path, capsys):
    assert run(tmp_path, "solve") == 0
    assert "C_tot: min =" in capsys.readouterr().out
    report = json.loads((tmp_path / "out" / "solve-report.json").read_text())
    assert {e["objective"] for e in report["solve"]} == {"C_tot", "E_in"}
    assert "energy_report" in report["solve"][0]


def test_solve_raw_lp_and_unbounded(tmp_path, capsys):
    model = tmp_path / "m.json"
    model.write_text(json.dumps(MIN_SUM_DOC))
    assert run(tmp_path, "--model", str(model), "solve") == 0
    assert run(tmp_path, "--model", str(model), "solve", "--maximize") == 1
    assert "unbounded" in capsys.readouterr().out.lower()


def test_infeasible_model_exit_1(tmp_path):
    doc = json.loads(json.dumps(MIN_SUM_DOC))
    doc["constraints"].append({"terms": [{"var": "x1", "coef": 1}], "sense": "<=", "rhs": -1})
    model = tmp_path / "m.json"
    model.write_text(json.dumps(doc))
    assert run(tmp_path, "--model", str(model), "solve") == 1
    assert run(tmp_path, "--model", str(model), "neccond", "--selector", "second", "--eps", "0=0.1", "--single") == 1


def test_pareto(tmp_path, capsys):
    assert run(tmp_path, "pareto", "--epsilons", "0.01,0.05") == 0
    rows = (tmp_path / "out" / "pareto-front.csv").read_text().splitlines()
    assert len(rows) == 5
    manifest = json.loads((tmp_path / "out" / "pareto-manifest.json").read_text())
    assert manifest["schedule"] == [0.01, 0.05] and manifest["front_size"] == 4


def test_neccond_single_and_multi(tmp_path, capsys):
    assert run(tmp_path, "neccond", "--selector", "exogenous", "--eps", "C_tot=0.5", "E_in=0.5") == 0
    out = capsys.readouterr().out
    assert "upper bound" in out and "8 anchor(s)" in out
    assert run(tmp_path, "neccond", "--selector", "gas", "--eps", "C_tot=0.05", "--single") == 0
    assert "exact" in capsys.readouterr().out
    report = json.loads((tmp_path / "out" / "neccond-report.json").read_text())
    assert report["bound_kind"] == "exact" and report["selected_variables"][0].startswith("F[gas,")


def test_sweep_command(tmp_path):
    assert run(tmp_path, "--jobs", "2", "sweep", "--selector", "exogenous", "--grid", "0.01,0.05") == 0
    rows = (tmp_path / "out" / "sweep-sweep.csv").read_text().splitlines()
    assert len(rows) == 3 and rows[0] == "C_tot\\E_in,0.01,0.05"


def test_sweep_per_objective_grid(tmp_path):
    assert run(tmp_path, "sweep", "--selector", "gas", "--grid", "0.01;0.02,0.05") == 0
    rows = (tmp_path / "out" / "sweep-sweep.csv").read_text().splitlines()
    assert rows[0] == "C_tot\\E_in,0.02,0.05" and len(rows) == 2


def test_oracle_command(tmp_path, capsys):
    assert run(tmp_path, "--seed", "3", "oracle", "--corpus", "30") == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and "30/30 agree" in out


@pytest.mark.parametrize(
    "args",
    [
        ["neccond", "--selector", "coal", "--eps", "C_tot=0.1", "E_in=0.1"],
        ["neccond", "--selector", "gas", "--eps", "C_tot=0.1"],
        ["neccond", "--selector", "gas", "--eps", "C_tot=0.1", "E_in=0.1", "--single"],
        ["neccond", "--selector", "gas", "--eps", "cost:0.1", "E_in=0.1"],
        ["neccond", "--selector", "gas", "--eps", "X=0.1", "E_in=0.1"],
        ["pareto", "--epsilons", "0.5"],
        ["pareto", "--epsilons", "abc"],
        ["--jobs", "0", "solve"],
        ["solve", "--objective", "nope"],
        ["--model", "/nonexistent/model.json", "solve"],
        [],
    ],
)
def test_input_errors_exit_2(tmp_path, args, capsys):
    assert run(tmp_path, *args) == 2


def test_unwritable_out_exit_2(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["--out", str(blocker), "solve"]) == 2


def test_jobs_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("NEAROPT_JOBS", "3")
    assert run(tmp_path, "pareto", "--epsilons", "0.01") == 0
    assert json.loads((tmp_path / "out" / "pareto-manifest.json").read_text())["jobs"] == 3


def test_global_options_after_command(tmp_path):
    assert main(["pareto", "--out", str(tmp_path / "late"), "--epsilons", "0.01"]) == 0
    assert (tmp_path / "late" / "pareto-front.csv").exists()


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0


def test_invariant_failure_exit_3(tmp_path, monkeypatch):
    import nearopt.cli as cli
    from nearopt.necessary import NearOptError

    def broken(*a, **k):
        raise NearOptError("box around anchor 0 is infeasible")

    monkeypatch.setattr(cli, "necessary_condition_multi", broken)
    assert run(tmp_path, "neccond", "--selector", "gas", "--eps", "C_tot=0.1", "E_in=0.1") == 3


def test_non_monotone_sweep_exit_3(tmp_path, monkeypatch):
    import nearopt.cli as cli

    real = cli.sweep

    def tampered(*a, **k):
        res = real(*a, **k)
        return type(res)(res.axes, res.thresholds, res.reports, res.condition, res.m, False, ("axis 0 at (0, 0): 1 -> 2",))

    monkeypatch.setattr(cli, "sweep", tampered)
    assert run(tmp_path, "sweep", "--selector", "gas", "--grid", "0.01") == 3
