import json

import pytest

from softq.cli.main import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, main
from softq.services import bounds_service


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch):
    for name in ("SOFTQ_SEED", "SOFTQ_OUTPUT_DIR", "SOFTQ_WORKERS", "SOFTQ_STRICT"):
        monkeypatch.delenv(name, raising=False)


def _params(tmp_path, **overrides):
    payload = {"alpha": 0.001, "beta": 1000, "gamma": 0.9, "d_min": 0.25, "d_max": 0.25, "n_pairs": 4, "n_actions": 2}
    payload.update(overrides)
    path = tmp_path / "params.json"
    path.write_text(json.dumps(payload), encoding="utf-8")
    return str(path)


def test_bounds_prints_csv(tmp_path, capsys):
    code = main(["bounds", "--kind", "lse-lower", "--k", "0,100", "--params", _params(tmp_path)])
    assert code == EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "k,bound"
    k, value = lines[1].split(",")
    assert k == "0" and float(value) == pytest.approx(19.609, abs=1e-3)


def test_bounds_rejects_invalid_parameters(tmp_path):
    assert main(["bounds", "--kind", "trace", "--k", "1", "--params", _params(tmp_path, alpha=2.0)]) == EXIT_USAGE


def test_run_rejects_bad_config(tmp_path):
    config = tmp_path / "bad.json"
    config.write_text('{"fixed": 1.5}', encoding="utf-8")
    assert main(["run", "--config", str(config)]) == EXIT_USAGE
    config.write_text("{ no es json", encoding="utf-8")
    assert main(["run", "--config", str(config)]) == EXIT_USAGE


def test_run_missing_config_file(tmp_path):
    assert main(["run", "--config", str(tmp_path / "nada.json")]) == EXIT_USAGE


def test_run_writes_outputs(tmp_path):
    out = tmp_path / "out"
    code = main(["run", "--preset", "beta-sweep-lse", "--seeds", "2", "--steps", "200", "--out", str(out)])
    assert code == EXIT_OK
    assert (out / "beta_sweep_lse.csv").exists()
    assert (out / "beta_sweep_lse.svg").exists()
    assert json.loads((out / "config.json").read_text(encoding="utf-8"))["n_steps"] == 200


def test_solve_prints_optimum(capsys):
    assert main(["solve"]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["operator"] == "max"
    assert len(payload["q"]) == 2 and len(payload["q"][0]) == 2


def test_solve_soft_operator(capsys):
    assert main(["solve", "--operator", "lse", "--beta", "100"]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["converged"] is True
    assert payload["multiple_fixed_points"] is False


def test_trace_exports_coupled_run(tmp_path):
    code = main(["trace", "--operator", "boltz", "--beta", "10", "--alpha", "0.1", "--steps", "100",
                 "--co-simulate", "--out", str(tmp_path)])
    assert code == EXIT_OK
    files = list(tmp_path.glob("*_coupled.csv"))
    assert len(files) == 1
    assert files[0].read_text(encoding="utf-8").startswith("step,lower_min_slack,upper_min_slack")


def test_verify_failure_sets_exit_code(monkeypatch, capsys):
    monkeypatch.setattr(bounds_service, "decay_rate", lambda p: 0.5)
    assert main(["verify", "--quick", "--only", "11"]) == EXIT_FAILURE
    assert json.loads(capsys.readouterr().out)["passed"] is False
