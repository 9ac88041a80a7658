"""Pydantic settings: config/config.yml (defaults) and .env / environment (override)."""

import math
import os
from pathlib import Path
from typing import Literal

import yaml
from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, PydanticBaseSettingsSource
from pydantic_settings.sources import InitSettingsSource

# yml section -> keys copied verbatim into Settings field names
_SECTIONS: dict[str, dict[str, str]] = {
    "numerics": {
        "multiplicity_rel_tol": "multiplicity_rel_tol",
        "hyperbolicity_tol": "hyperbolicity_tol",
        "fd_rel_step": "fd_rel_step",
        "noncharacteristic_margin": "noncharacteristic_margin",
        "theta_xi_min": "theta_xi_min",
        "theta_xi_max": "theta_xi_max",
        "theta_points": "theta_points",
        "interior_dissipativity": "interior_dissipativity",
    },
    "profile": {
        "dx": "profile_dx",
        "min_halfwidth": "profile_min_halfwidth",
        "decay_lengths": "profile_decay_lengths",
        "shooting_tol": "shooting_tol",
    },
    "contour": {
        "eta1": "contour_eta1",
        "r0": "contour_r0",
        "radius": "contour_radius",
        "initial_samples": "contour_initial_samples",
        "max_samples": "contour_max_samples",
        "max_rel_step": "contour_max_rel_step",
        "max_arg_step": "contour_max_arg_step",
        "qr_interval": "evans_qr_interval",
    },
    "greens": {
        "gaussian_cutoff_sd": "gaussian_cutoff_sd",
        "bromwich_abscissa": "bromwich_abscissa",
        "bromwich_height": "bromwich_height",
        "bromwich_step": "bromwich_step",
        "bromwich_tail_tol": "bromwich_tail_tol",
    },
    "simulation": {
        "dx": "sim_dx",
        "margin": "sim_margin",
    },
    "runtime": {
        "evans_threads": "relax_evans_threads",
        "log_level": "log_level",
    },
}


def _load_yaml_config() -> dict:
    """Load config/config.yml and flatten to Settings field names. Missing file -> {}."""
    base = Path(__file__).resolve().parent.parent
    path = base / os.environ.get("CONFIG_FILE", "config/config.yml")
    if not path.is_file():
        return {}
    with path.open(encoding="utf-8") as f:
        data = yaml.safe_load(f) or {}
    flat: dict = {}
    for section, keys in _SECTIONS.items():
        block = data.get(section) or {}
        for key, field_name in keys.items():
            if block.get(key) is not None:
                flat[field_name] = block[key]
    return flat


class Settings(BaseSettings):
    # numerics
    multiplicity_rel_tol: float = 1e-8
    hyperbolicity_tol: float = 1e-10
    fd_rel_step: float = 1e-6
    noncharacteristic_margin: float = 1e-6
    theta_xi_min: float = 1e-3
    theta_xi_max: float = 1e3
    theta_points: int = 400
    interior_dissipativity: Literal["report", "fail", "off"] = "report"

    # profile
    profile_dx: float = Field(default=0.1, gt=0)
    profile_min_halfwidth: float = 40.0
    profile_decay_lengths: float = 16.0
    shooting_tol: float = 1e-8

    # evans / contour
    evans_qr_interval: int = Field(default=50, ge=1)
    contour_eta1: float = 0.05
    contour_r0: float = 0.05
    contour_radius: float | None = None
    contour_initial_samples: int = 64
    contour_max_samples: int = 6000
    contour_max_rel_step: float = 0.5
    contour_max_arg_step: float = math.pi / 2

    # greens
    gaussian_cutoff_sd: float = 12.0
    bromwich_abscissa: float = 0.5
    bromwich_height: float = 200.0
    bromwich_step: float = 0.05
    bromwich_tail_tol: float = 0.05

    # simulation
    sim_dx: float = Field(default=0.05, gt=0)
    sim_margin: float = 10.0

    # runtime
    relax_evans_threads: int = Field(default=1, ge=1)
    log_level: str = "INFO"

    @field_validator("log_level", mode="before")
    @classmethod
    def normalize_log_level(cls, v: str | None) -> str:
        if not v:
            return "INFO"
        return str(v).strip().strip('"').strip("'").upper()

    model_config = {
        "env_file": ".env",
        "env_file_encoding": "utf-8",
        "extra": "ignore",
    }

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> tuple[PydanticBaseSettingsSource, ...]:
        # Priority: env > dotenv > init > config.yml (so RELAX_EVANS_THREADS overrides config.yml)
        yaml_source = InitSettingsSource(settings_cls, _load_yaml_config())
        return (env_settings, dotenv_settings, init_settings, yaml_source)


settings = Settings()
