"""
Configuration loading for quasibel.

Settings live in a sectioned YAML file (config/quasibel.yaml by default) and
are validated into pydantic models. Library functions read them only when an
explicit argument is not supplied.
"""

import hashlib
import json
import os
from functools import lru_cache
from pathlib import Path
from typing import Optional

import yaml
from pydantic import BaseModel, Field

DEFAULT_CONFIG_PATH = Path(__file__).resolve().parent.parent / "config" / "quasibel.yaml"
CONFIG_ENV_VAR = "QUASIBEL_CONFIG"


class LoggingSettings(BaseModel):
    level: str = "INFO"
    log_dir: str = "./logs"
    log_to_file: bool = False


class GridSettings(BaseModel):
    disk_margin: float = 0.125
    strip_xi_min: float = -5.283185307179586


class TransformSettings(BaseModel):
    backend: str = "fft"
    support_leak: float = 1e-6
    periodic_tolerance: float = 1e-10
    series_eps: float = 1e-13
    series_min_terms: int = 16
    series_max_terms: int = 4096
    direct_chunk: int = 2048


class NormalSettings(BaseModel):
    outer_half_width: float = 1.5
    laurent_radius: float = 1.2
    laurent_terms: int = 200
    image_margin: float = 1.25
    fc_tolerance: float = 0.1


class SolverSettings(BaseModel):
    series_tol: float = 1e-10
    max_iter: int = 500
    residual_tol: float = 1e-3
    b_max: float = 0.05
    chain_outer_iter: int = 60
    chain_tol: float = 1e-8
    normal: NormalSettings = Field(default_factory=NormalSettings)


class ParamSettings(BaseModel):
    beta: float = 0.25
    s: float = 2.0
    delta_max: float = 0.1
    ladder_start: float = 0.2
    ladder_rungs: int = 4
    cap_nodes: int = 9


class VerifyTolerances(BaseModel):
    isometry: float = 1e-3
    right_inverse: float = 1e-3
    closed_form_cells: float = 5.0
    normal_cells: float = 10.0
    chain_residual: float = 1e-3
    decay_alpha: float = 1.0


class VerifySettings(BaseModel):
    n: int = 128
    seed: int = 7
    workers: int = 1
    trials: int = 64
    tolerances: VerifyTolerances = Field(default_factory=VerifyTolerances)


class Settings(BaseModel):
    """Complete quasibel configuration."""
    logging: LoggingSettings = Field(default_factory=LoggingSettings)
    grid: GridSettings = Field(default_factory=GridSettings)
    transforms: TransformSettings = Field(default_factory=TransformSettings)
    solver: SolverSettings = Field(default_factory=SolverSettings)
    params: ParamSettings = Field(default_factory=ParamSettings)
    verify: VerifySettings = Field(default_factory=VerifySettings)


def load_settings(path: Optional[str] = None) -> Settings:
    """
    Load settings from YAML.

    Args:
        path: Explicit config file. Falls back to $QUASIBEL_CONFIG, then the
            packaged default. A missing default file yields built-in defaults.

    Returns:
        Validated Settings instance
    """
    candidate = path or os.getenv(CONFIG_ENV_VAR)
    config_path = Path(candidate) if candidate else DEFAULT_CONFIG_PATH

    if not config_path.exists():
        if candidate:
            raise FileNotFoundError(f"Config file not found: {config_path}")
        return Settings()

    with open(config_path, encoding="utf-8") as f:
        raw = yaml.safe_load(f) or {}

    return Settings.model_validate(raw)


_active: Optional[Settings] = None


@lru_cache(maxsize=1)
def _default_settings() -> Settings:
    return load_settings()


def get_settings() -> Settings:
    """Get the process-wide settings (loaded once, or as installed by use_settings)."""
    return _active if _active is not None else _default_settings()


def use_settings(settings: Optional[Settings]) -> None:
    """Install settings for the process; None restores the loaded defaults."""
    global _active
    _active = settings


def config_hash(settings: Settings) -> str:
    """SHA-256 of the canonical JSON dump of the settings."""
    canonical = json.dumps(settings.model_dump(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
