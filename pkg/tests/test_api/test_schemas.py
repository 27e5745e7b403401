# tests/test_api/test_schemas.py
import json
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError

from src.api.schemas import ExperimentConfig, dump_config, format_validation_error, load_config
from src.entities.models import Condition, OperatorCase
from src.services.verification_harness import MeasurementPath, VerdictKind

CONFIG_DIR = Path(__file__).resolve().parents[2] / "configs"
BASE_KEYS = {"name": "beta", "case": "Tangential", "j": 2, "k": 0}
BASE = dict(BASE_KEYS, b0_coeffs=[[0, 0], [0, -1]])


def test_minimal_config_builds_spec():
    config = ExperimentConfig.model_validate(BASE)
    spec = config.to_spec()
    assert spec.case is OperatorCase.TANGENTIAL
    assert spec.b.b0.coeffs == (0j, -1j)
    assert spec.q.coeffs == (1 + 0j,)
    assert config.to_recipe().params.beta == Fraction(1, 8)


def test_sweep_defaults_and_overrides():
    config = ExperimentConfig.model_validate(BASE)
    sweep = config.to_sweep_config()
    assert sweep.h_values[0] == 2.0 ** -4
    assert sweep.h_values[-1] == 2.0 ** -12
    assert sweep.term_counts == (0, 1, 2, 3, 4)
    assert sweep.path is MeasurementPath.CONJUGATED
    overridden = config.to_sweep_config(grid=64, jobs=2)
    assert overridden.conjugated_points == 64
    assert overridden.full_points == 64
    assert overridden.jobs == 2


def test_unknown_keys_rejected_with_path():
    data = dict(BASE, sweep={"h_exponent": [4, 5]})
    with pytest.raises(ValidationError) as excinfo:
        ExperimentConfig.model_validate(data)
    assert "sweep.h_exponent" in format_validation_error(excinfo.value)


def test_inadmissible_beta_cites_range():
    with pytest.raises(ValidationError) as excinfo:
        ExperimentConfig.model_validate(dict(BASE, beta="1/3"))
    assert "(0, 1/4)" in str(excinfo.value)


def test_beta_must_be_rational():
    with pytest.raises(ValidationError):
        ExperimentConfig.model_validate(dict(BASE, beta="one eighth"))


def test_transversal_requires_j_one():
    with pytest.raises(ValidationError):
        ExperimentConfig.model_validate(dict(BASE, case="Transversal", j=2))


def test_expect_parses_verdict():
    config = ExperimentConfig.model_validate(dict(BASE, expect="Saturating"))
    assert config.expect is VerdictKind.SATURATING


def test_round_trip(tmp_path):
    config = ExperimentConfig.model_validate(dict(BASE, shift=[0.5, -0.25], oracle={"points": 24}))
    path = dump_config(config, tmp_path / "resolved.json")
    reloaded = load_config(path)
    assert reloaded == config
    assert reloaded.to_spec() == config.to_spec()
    assert json.loads(path.read_text())["sweep"]["thresholds"]["gain_fraction"] == pytest.approx(0.5)


@pytest.mark.parametrize(
    "name",
    [
        "beta_condition_tangential",
        "dxi_beta_condition_tangential",
        "factorable_k_eq_j",
        "beta_condition_transversal",
    ],
)
def test_bundled_configs_load(name):
    config = load_config(CONFIG_DIR / f"{name}.json")
    assert config.name == name
    config.to_sweep_config()


def test_legacy_coefficient_keys_accepted():
    legacy = ExperimentConfig.model_validate(dict(BASE_KEYS, b0=[[0, 0], [0, -1]], q=[[2, 0]]))
    current = ExperimentConfig.model_validate(dict(BASE, q_coeffs=[[2, 0]]))
    assert legacy.to_spec() == current.to_spec()
    assert "b0_coeffs" in legacy.resolved()


def test_unnormalized_symbol_is_shifted_to_the_maximum():
    config = ExperimentConfig.model_validate(dict(BASE, b0_coeffs=[[0, 2], [0, -1]]))
    report = config.condition_report()
    assert report["condition"] == "BetaCondition"
    assert report["origin_shift"] == pytest.approx(2.0, abs=1e-8)
    b0 = config.to_recipe().spec.b.b0
    assert b0(np.array([0.0, 1.0])) == pytest.approx([0.0, -1j], abs=1e-8)


def test_dxi_beta_symbol_is_classified():
    config = ExperimentConfig.model_validate(dict(BASE_KEYS, k=1, b1_coeffs=[[0, 0], [0, -1]]))
    condition, shift = config.classify()
    assert condition is Condition.DXI_BETA
    assert shift == pytest.approx(0.0, abs=1e-8)


def test_interval_restricts_the_sign_change_search():
    # Im b0 = 1 - 3t^2: on the default box the running integral peaks at the left end
    b0 = [[0, 1], [0, 0], [0, -3]]
    with pytest.raises(ValidationError):
        ExperimentConfig.model_validate(dict(BASE, b0_coeffs=b0))
    config = ExperimentConfig.model_validate(dict(BASE, b0_coeffs=b0, interval=[-1, 1]))
    condition, shift = config.classify()
    assert condition is Condition.BETA
    assert shift == pytest.approx(1 / np.sqrt(3), abs=1e-8)


def test_interval_must_be_ordered():
    with pytest.raises(ValidationError):
        ExperimentConfig.model_validate(dict(BASE, interval=[1, -1]))


@pytest.mark.parametrize(
    "overrides",
    [
        {"k": 2},
        {"b0_coeffs": [[1, 0]]},
    ],
)
def test_operators_without_quasimode_need_allow_degenerate(overrides):
    with pytest.raises(ValidationError) as excinfo:
        ExperimentConfig.model_validate(dict(BASE, **overrides))
    assert "allow_degenerate" in str(excinfo.value)
    config = ExperimentConfig.model_validate(dict(BASE, allow_degenerate=True, **overrides))
    assert config.condition_report()["origin_shift"] == 0.0


def test_cutoff_settings_reach_the_recipe():
    config = ExperimentConfig.model_validate(dict(BASE, cutoff={"t_radius": 5.0, "plateau": 0.7, "width": 0.9}))
    cutoff = config.to_recipe().cutoff
    assert (cutoff.t_radius, cutoff.plateau, cutoff.width) == (5.0, 0.7, 0.9)
    assert config.analysis_interval == (-5.0, 5.0)
