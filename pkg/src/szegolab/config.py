import os
from copy import deepcopy
from pathlib import Path
from typing import Any, Dict, Optional

import yaml
from dotenv import load_dotenv
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

from .exceptions import ConstraintError

load_dotenv()

CONFIG_DIR = Path(__file__).parent / "config"
EXPERIMENTS_FILE = CONFIG_DIR / "experiments.yaml"


def _default_threads() -> int:
    return max(1, min(8, os.cpu_count() or 1))


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_prefix="SZEGOLAB_", env_file=".env", extra="ignore", populate_by_name=True
    )

    thread_count: int = Field(default_factory=_default_threads, ge=1, validation_alias="SZEGOLAB_THREADS")
    log_level: str = "INFO"
    log_json: bool = False
    output_dir: Path = Path("results")
    seed: int = 0

    # seminorm sampling grid
    seminorm_points_per_decade: int = 512
    seminorm_decades: int = 8
    seminorm_uniform_points: int = 2048

    # Helffer-Sjostrand quadrature
    hs_tolerance: float = 1e-6
    hs_max_depth: int = 40
    hs_max_cells: int = 200_000
    hs_gauss_order: int = 8

    # coefficients and discretization
    w1_nodes: int = 2048
    box_factor: float = 2.0
    symbol_oversampling: int = 4


settings = Settings()


def _deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    merged = deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_profile(name: str) -> Dict[str, Any]:
    """Return one named profile from the packaged experiments.yaml"""
    with open(EXPERIMENTS_FILE, "r") as f:
        profiles = yaml.safe_load(f) or {}
    if name not in profiles:
        raise ConstraintError(f"unknown experiment profile '{name}'; known: {sorted(profiles)}")
    return profiles[name]


def load_experiment_config(profile: str, path: Optional[Path] = None) -> Dict[str, Any]:
    """Packaged profile deep-merged with an optional user YAML file."""
    config = load_profile(profile)
    if path is not None:
        with open(path, "r") as f:
            user = yaml.safe_load(f) or {}
        if not isinstance(user, dict):
            raise ConstraintError(f"config file {path} must contain a mapping of sections")
        config = _deep_merge(config, user)
    return config
