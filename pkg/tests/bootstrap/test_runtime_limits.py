from __future__ import annotations

import logging

import pytest
from conftest import build_test_config

from vembench import create_runtime
from vembench.bootstrap.validation import validate_startup_config


def test_create_runtime_accepts_default_test_config():
    config = create_runtime(build_test_config())
    assert config.BENCH_WORKERS == 1
    assert logging.getLogger().level == logging.WARNING


def test_config_reads_environment_overrides(monkeypatch):
    monkeypatch.setenv("TAU_ELASTICITY", "0.25")
    monkeypatch.setenv("ELL_MAX", "7")
    from vembench.config import Config

    config = Config()
    assert config.TAU_ELASTICITY == 0.25
    assert config.ELL_MAX == 7
    assert config.default_tau("elasticity") == 0.25
    assert config.default_tau("laplace") == config.TAU_LAPLACE


@pytest.mark.parametrize(
    ("config_overrides", "expected_message"),
    [
        ({"LOG_LEVEL": "chatty"}, "LOG_LEVEL must be one of"),
        ({"BENCH_WORKERS": 0}, "BENCH_WORKERS must be greater than 0."),
        ({"TAU_LAPLACE": 0.0}, "TAU_LAPLACE must be greater than 0."),
        ({"TAU_STOKES": -1.0}, "TAU_STOKES must be greater than 0."),
        ({"RANK_TOL_MULTIPLIER": 0.0}, "RANK_TOL_MULTIPLIER must be greater than 0."),
        ({"ELL_MAX": 0}, "ELL_MAX must be greater than or equal to 1."),
        ({"DIVERGENCE_FACTOR": 1.0}, "DIVERGENCE_FACTOR must be greater than 1."),
        ({"VC_QUAD_SURPLUS": -1}, "VC_QUAD_SURPLUS must be greater than or equal to 0."),
        ({"MESH_MERGE_TOL": 0.0}, r"MESH_MERGE_TOL must be in \(0, 1e-3\)."),
        ({"STOKES_VISCOSITY": 0.0}, "STOKES_VISCOSITY must be greater than 0."),
        ({"POISSON_RATIO": 0.5}, r"POISSON_RATIO must be in \(-1, 0.5\)."),
    ],
)
def test_validate_startup_config_rejects_invalid_values(config_overrides, expected_message):
    with pytest.raises(RuntimeError, match=expected_message):
        validate_startup_config(build_test_config(**config_overrides))


def test_create_runtime_configures_logging_before_validation():
    with pytest.raises(RuntimeError, match="ELL_MAX"):
        create_runtime(build_test_config(LOG_LEVEL="ERROR", ELL_MAX=0))
    assert logging.getLogger().level == logging.ERROR


def test_create_runtime_reports_an_unknown_log_level_as_a_config_error():
    with pytest.raises(RuntimeError, match="LOG_LEVEL must be one of"):
        create_runtime(build_test_config(LOG_LEVEL="chatty"))
    assert logging.getLogger().level == logging.INFO
