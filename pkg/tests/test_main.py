# Copyright 2026 Adobe. All rights reserved.
# This file is licensed to you under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License. You may obtain a copy
# of the License at http://www.apache.org/licenses/LICENSE-2.0

# Unless required by applicable law or agreed to in writing, software distributed under
# the License is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR REPRESENTATIONS
# OF ANY KIND, either express or implied. See the License for the specific language
# governing permissions and limitations under the License.

import csv
import json

import numpy as np
import pytest

from kinstils.main import EXIT_NO_CONVERGENCE, EXIT_OK, EXIT_USAGE, run
from kinstils.reports import format_summary, format_value, summary_path, write_csv

MANUFACTURED = {
    "T": 1.0, "v": [1.0], "nt": 4, "nx": 4,
    "G": "sin(pi*x) + t*pi*cos(pi*x)", "exact": "t*sin(pi*x)", "ladder": [4, 8],
}

VLASOV = {
    "T": 1.0,
    "vlasov": {
        "quad_order": 4,
        "fields": [{"name": "free"}, {"name": "gyration", "B": ["0", "0", "1"]}],
        "functions": [{"name": "bump", "f": "t*(x*(1-x))^2*(vx*(1-vx))^2", "support_x": [[0, 1]],
                       "support_v": {"vx": [0, 1]}}],
        "trajectory": {"x0": [0, 0, 0], "v0": [1, 0, 0], "dt": 0.01, "nsteps": 100, "fields": "gyration"},
    },
}


def write_config(tmp_path, data, name="case.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


def read_summary(out):
    with open(summary_path(out), encoding="utf-8") as f:
        return json.load(f)


def read_rows(out):
    with open(out, newline="", encoding="utf-8") as f:
        return list(csv.reader(f))


def test_solve_zero_data(tmp_path):
    out = str(tmp_path / "zero.csv")
    assert run(["solve", "--config", write_config(tmp_path, {"nt": 2, "nx": 2}), "--out", out]) == EXIT_OK
    summary = read_summary(out)
    assert summary["l2_f"] == 0.0
    assert summary["ratio"] is None
    assert summary["iterations"] == 0
    assert summary["pass"] is True
    rows = read_rows(out)
    assert rows[0] == ["t", "x", "u", "f", "g"]
    assert len(rows) == 1 + 9
    assert all(float(row[2]) == 0.0 for row in rows[1:])


def test_solve_manufactured(tmp_path, capsys):
    out = str(tmp_path / "solve.csv")
    assert run(["solve", "--config", write_config(tmp_path, MANUFACTURED), "--out", out]) == EXIT_OK
    printed = json.loads(capsys.readouterr().out)
    assert printed == read_summary(out)
    assert printed["pass"] is True
    assert 0 < printed["ratio"] <= printed["bound"] == 2.0


def test_solve_is_deterministic(tmp_path):
    config = write_config(tmp_path, MANUFACTURED)
    first, second = str(tmp_path / "first.csv"), str(tmp_path / "second.csv")
    assert run(["solve", "--config", config, "--out", first, "--quiet"]) == EXIT_OK
    assert run(["solve", "--config", config, "--out", second, "--quiet"]) == EXIT_OK
    with open(first, "rb") as a, open(second, "rb") as b:
        assert a.read() == b.read()


def test_quiet_prints_nothing(tmp_path, capsys):
    out = str(tmp_path / "quiet.csv")
    assert run(["solve", "--config", write_config(tmp_path, {"nt": 2, "nx": 2}), "--out", out, "--quiet"]) == 0
    assert capsys.readouterr().out == ""


def test_output_from_config_and_default(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert run(["solve", "--config", write_config(tmp_path, {"nt": 2, "nx": 2, "output": "named.csv"}),
                "--quiet"]) == EXIT_OK
    assert (tmp_path / "named.csv").exists()
    assert run(["solve", "--config", write_config(tmp_path, {"nt": 2, "nx": 2}), "--quiet"]) == EXIT_OK
    assert (tmp_path / "solve.csv").exists()
    assert (tmp_path / "solve.csv.summary.json").exists()


def test_solver_iteration_cap(tmp_path):
    config = write_config(tmp_path, dict(MANUFACTURED, solver={"maxit": 1}))
    assert run(["solve", "--config", config, "--out", str(tmp_path / "cap.csv"), "--quiet"]) == EXIT_NO_CONVERGENCE


@pytest.mark.parametrize("args", [
    ["solve"],
    ["solve", "--config", "missing.json"],
    ["convergence", "--config", "{config}"],
    ["vlasov-check", "--config", "{config}"],
    ["poincare", "--T", "-1", "--nt", "2", "--nx", "2"],
    ["poincare", "--lower", "0", "--nt", "2", "--nx", "2"],
])
def test_usage_errors(tmp_path, args):
    config = write_config(tmp_path, {"nt": 2, "nx": 2})
    args = [arg.format(config=config) for arg in args] + ["--out", str(tmp_path / "out.csv"), "--quiet"]
    assert run(args) == EXIT_USAGE


def test_malformed_config(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"T": 1.0,', encoding="utf-8")
    assert run(["solve", "--config", str(path), "--quiet"]) == EXIT_USAGE


def test_unknown_command_and_version():
    with pytest.raises(SystemExit) as e:
        run(["frobnicate"])
    assert e.value.code == 2
    with pytest.raises(SystemExit) as e:
        run(["--version"])
    assert e.value.code == 0


def test_lift_distance_to_diagonal(tmp_path):
    out = str(tmp_path / "lift.csv")
    config = write_config(tmp_path, {"v": [1.0], "nt": 4, "nx": 4, "u0": "x", "ub": "t"})
    assert run(["lift", "--config", config, "--out", out, "--quiet"]) == EXIT_OK
    rows = read_rows(out)
    assert rows[0] == ["t", "x", "g", "source", "hit_time"]
    for t, x, g, source, _ in rows[1:]:
        assert float(g) == pytest.approx(abs(float(x) - float(t)), abs=1e-12)
        assert source in ("initial", "boundary")
    summary = read_summary(out)
    assert summary["pass"] is True
    assert summary["initial_nodes"] + summary["boundary_nodes"] == 25


def test_poincare_single_case(tmp_path):
    out = str(tmp_path / "poincare.csv")
    assert run(["poincare", "--T", "1", "--v", "1", "--nt", "6", "--nx", "6", "--out", out, "--quiet"]) == EXIT_OK
    rows = read_rows(out)
    assert rows[0] == ["v", "T", "nt", "nx", "lambda_min", "C_h", "bound_2T", "pass"]
    assert rows[1][0] == "1"
    assert rows[1][-1] == "true"
    summary = read_summary(out)
    assert summary["C_h"] <= 2.0
    assert summary["method"] == "shift-invert"


def test_poincare_two_dimensions_inverse_power(tmp_path):
    out = str(tmp_path / "p2.csv")
    args = ["poincare", "--T", "0.5", "--v", "0", "0", "--nt", "3", "--nx", "3", "--lower", "0", "0",
            "--upper", "1", "2", "--method", "inverse-power", "--seed", "5", "--out", out, "--quiet"]
    assert run(args) == EXIT_OK
    assert read_rows(out)[1][3] == "3;3"


def test_poincare_sweep(tmp_path):
    sweep_file = tmp_path / "sweep.yaml"
    sweep_file.write_text("v: [[-1.0], [0.0], [2.0]]\nT: [0.5, 1.0]\nn: [4]\n", encoding="utf-8")
    out = str(tmp_path / "sweep.csv")
    assert run(["poincare", "--sweep", str(sweep_file), "--parallel", "--out", out, "--quiet"]) == EXIT_OK
    rows = read_rows(out)
    assert len(rows) == 1 + 6
    assert [row[1] for row in rows[1:]] == ["0.5", "1", "0.5", "1", "0.5", "1"]
    summary = read_summary(out)
    assert summary["cases"] == 6
    assert summary["max_C_h_over_2T"] <= 1.0


def test_poincare_sweep_is_deterministic(tmp_path):
    sweep_file = tmp_path / "sweep.yaml"
    sweep_file.write_text("v: [[-4.0], [0.0], [0.5], [1.0]]\nT: [0.5, 2.0]\nn: [4, 8]\n", encoding="utf-8")
    outputs = []
    for name, extra in [("first.csv", []), ("second.csv", []), ("parallel.csv", ["--parallel"])]:
        out = tmp_path / name
        assert run(["poincare", "--sweep", str(sweep_file), "--out", str(out), "--quiet"] + extra) == EXIT_OK
        outputs.append(out.read_bytes())
    assert len(read_rows(str(tmp_path / "first.csv"))) == 1 + 16
    assert outputs[0] == outputs[1] == outputs[2]


def test_convergence(tmp_path):
    out = str(tmp_path / "convergence.csv")
    assert run(["convergence", "--config", write_config(tmp_path, MANUFACTURED), "--out", out,
                "--quiet"]) == EXIT_OK
    rows = read_rows(out)
    assert rows[0] == ["n", "h", "error", "order", "ratio", "stable"]
    assert [row[0] for row in rows[1:]] == ["4", "8"]
    assert rows[1][3] == ""
    summary = read_summary(out)
    assert summary["decreasing"] is True
    assert summary["errors"][1] < summary["errors"][0]


def test_vlasov_check(tmp_path):
    out = str(tmp_path / "vlasov.csv")
    assert run(["vlasov-check", "--config", write_config(tmp_path, VLASOV), "--out", out, "--quiet"]) == EXIT_OK
    rows = read_rows(out)
    assert [row[0] for row in rows[1:]] == ["free/bump", "gyration/bump"]
    summary = read_summary(out)
    assert summary["failed"] == []
    assert set(summary["max_divergence"]) == {"free", "gyration"}
    assert all(value <= 1e-6 for value in summary["max_divergence"].values())
    assert summary["speed_drift"] <= 1e-8
    trajectory = read_rows(out + ".trajectory.csv")
    assert trajectory[0] == ["step", "t", "x1", "x2", "x3", "v1", "v2", "v3"]
    assert len(trajectory) == 1 + 101


@pytest.mark.parametrize("settings", [{"cells": 0}, {"quad_order": 0}])
def test_vlasov_check_rejects_empty_grid(tmp_path, settings):
    out = str(tmp_path / "vlasov.csv")
    config = write_config(tmp_path, {"vlasov": settings})
    assert run(["vlasov-check", "--config", config, "--out", out, "--quiet"]) == EXIT_USAGE


def test_format_value():
    assert format_value(None) == ""
    assert format_value(True) == "true"
    assert format_value(np.bool_(False)) == "false"
    assert format_value(np.int64(3)) == "3"
    assert format_value(0.1) == "0.10000000000000001"
    assert format_value(1.0) == "1"
    assert format_value(np.float64(-2.5)) == "-2.5"
    assert format_value([1.0, 2]) == "1;2"
    assert format_value("gyration/bump") == "gyration/bump"


def test_write_csv_and_summary(tmp_path):
    path = str(tmp_path / "rows.csv")
    write_csv(path, ["a", "b"], [[1, 0.5], [None, True]])
    with open(path, "rb") as f:
        assert f.read() == b"a,b\n1,0.5\n,true\n"
    assert json.loads(format_summary({"x": np.float64(1.5), "ok": np.bool_(True), "v": np.arange(2)})) == {
        "x": 1.5, "ok": True, "v": [0, 1]}
