import json
import subprocess
import sys

import pytest

from netsecopt.cli import EXIT_INPUT, EXIT_LIMIT, EXIT_OK, main
from netsecopt.instance import Instance
from netsecopt.milp.mpsio import parse_mps


@pytest.fixture
def toy_file(tmp_path):
    path = tmp_path / "toy.json"
    assert main(["generate", "--toy", "--out", str(path)]) == EXIT_OK
    return path


def test_generate_toy(toy_file):
    inst = Instance.from_json(toy_file.read_text())
    assert len(inst.network.flows) == 6 and inst.weights == {"alpha3": 0.05}


def test_generate_fat_tree_to_stdout(capsys):
    assert main(["generate", "--pods", "4", "--seed", "3", "--flows-per-host", "3"]) == EXIT_OK
    inst = Instance.from_json(capsys.readouterr().out)
    assert len(inst.network.hosts) == 16 and len(inst.network.flows) == 96


def test_generate_is_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert main(["generate", "--seed", "11", "--out", str(p)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()


def test_solve(toy_file, tmp_path):
    out = tmp_path / "config.json"
    assert main(["solve", str(toy_file), "--alpha", "0.9", "--out", str(out)]) == EXIT_OK
    data = json.loads(out.read_text())
    assert sorted(data["blocked"]) == ["f2", "f3"]
    assert data["report"]["risk"] == pytest.approx(5.0)
    assert "probabilities" not in data["report"]


def test_solve_with_weights_file(toy_file, tmp_path, capsys):
    w = tmp_path / "w.json"
    w.write_text(json.dumps({"alpha": 1.0}))
    assert main(["solve", str(toy_file), "--weights", str(w), "--solver", "bnb"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["blocked"] == []
    w.write_text(json.dumps({"gamma": 1.0}))
    assert main(["solve", str(toy_file), "--weights", str(w)]) == EXIT_INPUT


def test_solve_external_writes_mps(toy_file, tmp_path):
    mps = tmp_path / "model.mps"
    assert main(["solve", str(toy_file), "--solver", "external",
                 "--mps-out", str(mps)]) == EXIT_OK
    names = json.loads((tmp_path / "model.mps.names.json").read_text())
    p = parse_mps(mps.read_text(), names)
    assert "rho[f0,s*,0]" in p.col_names
    assert main(["solve", str(toy_file), "--solver", "external"]) == EXIT_INPUT


def test_solve_time_limit_exit_code(tmp_path):
    inst = tmp_path / "big.json"
    main(["generate", "--seed", "0", "--out", str(inst)])
    code = main(["solve", str(inst), "--alpha", "0.5", "--solver", "bnb",
                 "--time-limit", "0.01"])
    assert code == EXIT_LIMIT


def test_sweep_csv(toy_file, tmp_path):
    out = tmp_path / "sweep.csv"
    assert main(["sweep", str(toy_file), "--alphas", "0.5,1.0", "--betas", "0.5",
                 "--out", str(out)]) == EXIT_OK
    lines = out.read_text().splitlines()
    assert len(lines) == 3 and lines[0].startswith("alpha,beta,")


def test_sweep_json(toy_file, capsys):
    assert main(["sweep", str(toy_file), "--alphas", "1", "--format", "json",
                 "--timing"]) == EXIT_OK
    rows = json.loads(capsys.readouterr().out)
    assert rows[0]["risk_norm"] == 1.0 and rows[0]["solve_time_s"] is not None


def test_sweep_rejects_alpha_zero(toy_file):
    assert main(["sweep", str(toy_file), "--alphas", "0,0.5"]) == EXIT_INPUT


def test_evaluate_instance_and_config(toy_file, tmp_path, capsys):
    cfg = tmp_path / "c.json"
    main(["solve", str(toy_file), "--alpha", "0.5", "--out", str(cfg)])
    assert main(["evaluate", str(toy_file), "--config", str(cfg)]) == EXIT_OK
    rep = json.loads(capsys.readouterr().out)
    assert rep["risk"] == 0.0 and rep["delivered_value"] == 7.0
    assert main(["evaluate", str(toy_file)]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["risk"] == pytest.approx(210.0)


def test_evaluate_graph_json(tmp_path, capsys, toy_graph):
    path = tmp_path / "g.json"
    path.write_text(json.dumps(toy_graph.to_dict()))
    assert main(["evaluate", str(path), "--beta", "1"]) == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert out["risk"] == pytest.approx(210.0) and out["hybrid"] == 1.0


@pytest.mark.parametrize("fmt", ["mps", "free-mps", "lp"])
def test_export(toy_file, tmp_path, fmt):
    out = tmp_path / f"m.{fmt}"
    assert main(["export", str(toy_file), "--format", fmt, "--out", str(out)]) == EXIT_OK
    assert out.read_text()


def test_export_no_mangle_fails(toy_file):
    assert main(["export", str(toy_file), "--no-mangle"]) == EXIT_INPUT


def test_input_errors(tmp_path):
    assert main(["solve", str(tmp_path / "missing.json")]) == EXIT_INPUT
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["solve", str(bad)]) == EXIT_INPUT
    bad.write_text(json.dumps({"network": {}}))
    assert main(["solve", str(bad)]) == EXIT_INPUT
    assert main(["generate", "--pods", "3"]) == EXIT_INPUT


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "netsecopt", "generate", "--toy"],
                         capture_output=True, text=True, check=True)
    assert Instance.from_json(res.stdout).start == ("0:2",)
