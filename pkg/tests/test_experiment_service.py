import numpy as np
import pytest

from softq.errors import ConfigParseError, ConfigValidationError
from softq.models import OperatorName
from softq.services import parse_config, run_experiment, run_sweep, serialize_config
from softq.services.experiment_service import (
    ALPHA_GRID,
    BETA_GRID,
    load_config,
    point_bound,
    run_seed,
    with_overrides,
)


def _small(**overrides):
    cfg = parse_config('{"n_seeds": 2, "n_steps": 300}', "beta-sweep-lse")
    return with_overrides(cfg, **overrides)


def test_presets_carry_sweep_defaults():
    beta_sweep = parse_config("", "beta-sweep-boltz")
    assert beta_sweep.sweep.axis == "beta" and beta_sweep.sweep.values == BETA_GRID
    assert beta_sweep.fixed == 0.001 and beta_sweep.algorithm == "boltzmann"
    alpha_sweep = parse_config("", "alpha-sweep-lse")
    assert alpha_sweep.sweep.axis == "alpha" and alpha_sweep.sweep.values == ALPHA_GRID
    assert alpha_sweep.point_parameters(1e-3) == (1e-3, 1000.0)
    assert beta_sweep.n_seeds == 10 and beta_sweep.n_steps == 100_000


def test_empty_document_uses_defaults():
    cfg = parse_config("")
    assert cfg.operator_names() == [OperatorName.LSE, OperatorName.BOLTZMANN]
    assert cfg.protocol == "iid" and cfg.common_random_numbers


def test_alpha_outside_unit_interval_is_rejected():
    with pytest.raises(ConfigValidationError) as info:
        parse_config('{"fixed": 1.5}')
    assert info.value.field == "fixed"


def test_alpha_sweep_values_must_be_below_one():
    with pytest.raises(ConfigValidationError):
        parse_config('{"sweep": {"axis": "alpha", "values": [0.5, 1.5]}, "fixed": 10}')


def test_unknown_field_is_rejected():
    with pytest.raises(ConfigValidationError):
        parse_config('{"n_sedes": 3}')


def test_unknown_preset_is_rejected():
    with pytest.raises(ConfigValidationError):
        parse_config("", "gamma-sweep")


def test_bad_json_reports_position():
    with pytest.raises(ConfigParseError) as info:
        parse_config('{\n  "n_seeds": 3,\n  "n_steps": ,\n}')
    assert info.value.line == 3


def test_config_round_trip(tmp_path):
    cfg = _small(label="prueba", bound_mode="worst-case")
    path = tmp_path / "config.json"
    path.write_text(serialize_config(cfg), encoding="utf-8")
    assert load_config(path) == cfg


def test_zero_steps_error_is_optimum_norm(q_star):
    result = run_sweep(_small(n_steps=0, sweep={"axis": "beta", "values": [100.0]}))
    assert len(result.points) == 1
    assert result.points[0].mean_error == pytest.approx(q_star.linf())
    assert result.points[0].stderr == 0.0


def test_sweep_points_are_sorted_and_bounded():
    result = run_sweep(_small(sweep={"axis": "beta", "values": [1000.0, 10.0]}))
    assert result.sweep_values.tolist() == [10.0, 1000.0]
    assert all(point.n_seeds == 2 for point in result.points)
    assert np.all(np.isfinite(result.bounds))
    assert np.all(result.mean_errors <= result.bounds), "El error medio debe quedar bajo la cota"


def test_seed_run_is_reproducible():
    cfg = _small(sweep={"axis": "beta", "values": [10.0, 100.0]})
    first, _ = run_seed(cfg, OperatorName.LSE, 0, 1)
    again, _ = run_seed(cfg, OperatorName.LSE, 0, 1)
    assert first.final_error == again.final_error


def test_episodic_protocol_uses_empirical_distribution():
    cfg = _small(protocol="episodic", sweep={"axis": "beta", "values": [100.0]})
    outcome, d = run_seed(cfg, OperatorName.LSE, 0, 0)
    assert d.sum() == pytest.approx(1.0)
    assert outcome.assumption_violations, "El protocolo por trayectorias queda etiquetado"


def test_co_simulation_reports_sandwich():
    cfg = _small(co_simulate=True, sweep={"axis": "beta", "values": [10.0]}, n_steps=200)
    outcome, _ = run_seed(cfg, OperatorName.BOLTZMANN, 0, 0)
    assert outcome.sandwich_holds is True


def test_bound_is_nan_when_parameters_are_invalid(mdp, q_star):
    cfg = _small()
    assert np.isnan(point_bound(cfg, OperatorName.LSE, 10.0, 0.0, 0.25, mdp, q_star))


def test_experiment_is_deterministic(tmp_path):
    cfg = _small(algorithm="both", sweep={"axis": "beta", "values": [10.0, 1000.0]})
    run_experiment(cfg, tmp_path / "a")
    run_experiment(cfg, tmp_path / "b")
    for name in ("beta_sweep_lse.csv", "beta_sweep_boltzmann.csv", "beta_sweep_lse_seeds.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert (tmp_path / "a" / "beta_sweep_lse.svg").exists()
    assert (tmp_path / "a" / "config.json").exists()
