import pytest
import yaml
from pydantic import ValidationError

from structured_roabp.config import (
    SEED_ENV_VAR,
    SETTINGS,
    RunConfig,
    deep_merge,
    load_config,
    resolve_seed,
)


def test_packaged_defaults_load():
    config = load_config(local_path=__file__ + '.missing')
    assert config.run.seed == 42
    assert config.convert.verify_tol == 1e-6
    assert config.guards.max_order_vars == 8


def test_deep_merge_keeps_untouched_keys():
    base = {'run': {'seed': 1, 'tol': 1e-9}, 'output': {'dir': 'output'}}
    merged = deep_merge(base, {'run': {'seed': 7}})
    assert merged == {'run': {'seed': 7, 'tol': 1e-9}, 'output': {'dir': 'output'}}


def test_local_config_overrides_defaults(tmp_path):
    local = tmp_path / 'config.local.yaml'
    local.write_text(yaml.safe_dump({'run': {'trials': 5}, 'convert': {'workers': 2}}))
    config = load_config(local_path=local)
    assert config.run.trials == 5
    assert config.convert.workers == 2
    assert config.run.seed == 42


def test_invalid_local_config_is_rejected(tmp_path):
    local = tmp_path / 'config.local.yaml'
    local.write_text(yaml.safe_dump({'run': {'tol': -1}}))
    with pytest.raises(ValidationError):
        load_config(local_path=local)


def test_run_config_validation():
    config = RunConfig(command='convert', seed=1, tol=1e-9, trials=10, verify_tol=1e-6, guards=SETTINGS.guards)
    assert config.input_paths == []
    with pytest.raises(ValidationError):
        RunConfig(command='plot', seed=1, tol=1e-9, trials=10, verify_tol=1e-6, guards=SETTINGS.guards)
    with pytest.raises(ValidationError):
        RunConfig(command='convert', seed=1, tol=1e-9, trials=0, verify_tol=1e-6, guards=SETTINGS.guards)


def test_seed_resolution(monkeypatch):
    monkeypatch.delenv(SEED_ENV_VAR, raising=False)
    assert resolve_seed(None, SETTINGS) == SETTINGS.run.seed
    monkeypatch.setenv(SEED_ENV_VAR, '17')
    assert resolve_seed(None, SETTINGS) == 17
    assert resolve_seed(3, SETTINGS) == 3
    monkeypatch.setenv(SEED_ENV_VAR, 'abc')
    with pytest.raises(ValueError):
        resolve_seed(None, SETTINGS)
