import importlib.resources
import logging
import os
from pathlib import Path
from typing import Any, Literal, MutableMapping

import yaml
from pydantic import BaseModel, Field, PositiveInt

logger = logging.getLogger(__name__)

SEED_ENV_VAR = 'SROABP_SEED'


class RunSettings(BaseModel):
    seed: int
    tol: float = Field(gt=0)
    trials: PositiveInt


class GuardSettings(BaseModel):
    max_expand_terms: PositiveInt
    max_dpd_rows: PositiveInt
    max_order_vars: PositiveInt


class RingSettings(BaseModel):
    eigen_retries: PositiveInt
    coeff_bound: PositiveInt
    cluster_tol: float = Field(gt=0)


class ConvertSettings(BaseModel):
    dedupe_tol: float = Field(gt=0)
    verify_tol: float = Field(gt=0)
    rationalize: bool
    max_denominator: PositiveInt
    workers: PositiveInt


class VerifySettings(BaseModel):
    coord_bound: PositiveInt


class OutputSettings(BaseModel):
    dir: Path


class Config(BaseModel):
    run: RunSettings
    guards: GuardSettings
    ring: RingSettings
    convert: ConvertSettings
    verify: VerifySettings
    output: OutputSettings


class RunConfig(BaseModel):
    """Validated parameters of one CLI invocation."""

    command: Literal['construct', 'analyze', 'ring', 'convert', 'verify']
    input_paths: list[Path] = []
    output_path: Path | None = None
    seed: int
    tol: float = Field(gt=0)
    trials: PositiveInt
    verify_tol: float = Field(gt=0)
    guards: GuardSettings


def deep_merge(
    base: MutableMapping[str, Any], update: MutableMapping[str, Any]
) -> MutableMapping[str, Any]:
    """Recursively merges the 'update' dictionary into the 'base' dictionary."""
    for key, value in update.items():
        if (
            isinstance(value, MutableMapping)
            and key in base
            and isinstance(base[key], MutableMapping)
        ):
            base[key] = deep_merge(base[key], value)
        else:
            base[key] = value
    return base


def load_config(
    default_path: Path | None = None,
    local_path: Path = Path('config.local.yaml'),
) -> Config:
    """Loads the packaged default config and merges a local config over it."""
    if default_path is None:
        resource = importlib.resources.files('structured_roabp') / 'config.default.yaml'
        config = yaml.safe_load(resource.read_text(encoding='utf-8'))
    else:
        with open(default_path, 'r') as file:
            config = yaml.safe_load(file)

    try:
        with open(local_path, 'r') as file:
            local_config = yaml.safe_load(file) or {}
            config = deep_merge(config, local_config)
    except FileNotFoundError:
        logger.debug('No local config found. Using default settings')

    return Config(**config)


def resolve_seed(flag_seed: int | None, settings: Config) -> int:
    """Picks the seed from the flag, then the environment, then the config."""
    if flag_seed is not None:
        return flag_seed
    if env_seed := os.getenv(SEED_ENV_VAR):
        try:
            return int(env_seed)
        except ValueError:
            raise ValueError(f'{SEED_ENV_VAR} must be an integer, got {env_seed!r}')
    return settings.run.seed


SETTINGS = load_config()
