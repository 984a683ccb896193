"""Configuration management using Pydantic Settings.

Supports configuration via:
- Environment variables (QCLAB_ prefix, e.g. QCLAB_SEED)
- YAML configuration file (qclab.yaml)
- CLI arguments (highest priority)
"""

import logging
from pathlib import Path
from typing import Any

import yaml
from pydantic import Field, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from qclab.core.harness import ExperimentKind, ReportFormat
from qclab.core.protocol import Variant

logger = logging.getLogger(__name__)


class ExperimentDefaults(BaseSettings):
    """Default settings for experiments, overridable per run on the CLI."""

    model_config = SettingsConfigDict(env_prefix="QCLAB_")

    attack: ExperimentKind = Field(default=ExperimentKind.GCD, description="Attack run by each trial")
    variant: Variant | None = Field(
        default=None,
        description="Exponent variant (None = koffset for cf, corrected for honest and gcd2, original otherwise)",
    )
    p_bits: int = Field(default=512, ge=8, description="Bit length of the secret prime p")
    k_bits: int | None = Field(default=None, ge=0, description="Bit length of k (None = 80, clamped to p_bits - 2)")
    k1_max: int = Field(default=100, ge=0, description="Largest k1 offset")
    trials: int = Field(default=100, ge=1, description="Number of planted instances")
    beta: str | None = Field(default=None, description="Coppersmith beta as a rational (None = derived)")
    m: int = Field(default=3, ge=1, description="Coppersmith shift depth")
    t: int = Field(default=1, ge=0, description="Extra x-shifts")
    c: int = Field(default=1, ge=1, description="Root bound multiplier")
    delta: str = Field(default="3/4", description="LLL Lovasz parameter as a rational")
    sweep: bool = Field(default=False, description="Strip small cofactors in the two-query gcd attack")
    workers: int = Field(default=1, ge=1, description="Worker processes")
    format: ReportFormat = Field(default=ReportFormat.JSON, description="Experiment output format")


class Settings(BaseSettings):
    """Main application settings."""

    model_config = SettingsConfigDict(
        env_prefix="QCLAB_",
        env_nested_delimiter="__",
        extra="ignore",
    )

    # Fallback seed when --seed is not given
    seed: int | None = Field(default=None, ge=0, le=(1 << 64) - 1, description="64-bit experiment seed")

    defaults: ExperimentDefaults = Field(default_factory=ExperimentDefaults)

    config_file: Path | None = Field(
        default=None,
        description="Path to YAML configuration file",
    )

    verbose: bool = Field(default=False, description="Enable verbose output")

    @model_validator(mode="before")
    @classmethod
    def load_yaml_config(cls, data: dict[str, Any]) -> dict[str, Any]:
        """Load configuration from YAML file if specified or exists in default locations."""
        config_file = data.get("config_file")

        if config_file is None:
            default_locations = [
                Path("qclab.yaml"),
                Path("qclab.yml"),
                Path.home() / ".qclab.yaml",
                Path.home() / ".config" / "qclab" / "config.yaml",
            ]
            for loc in default_locations:
                if loc.exists():
                    config_file = loc
                    break

        if config_file is not None:
            config_path = Path(config_file)
            if not config_path.exists():
                raise FileNotFoundError(f"Configuration file not found: {config_path}")
            with open(config_path) as f:
                yaml_config = yaml.safe_load(f) or {}
            logger.debug(f"Loaded configuration from {config_path}")

            # Environment variables and explicit overrides take precedence
            for key, value in yaml_config.items():
                if isinstance(value, dict) and isinstance(data.get(key), dict):
                    data[key] = {**value, **data[key]}
                elif key not in data or data[key] is None:
                    data[key] = value

        return data


# Global settings instance (lazy loaded)
_settings: Settings | None = None


def get_settings(config_file: Path | None = None, **overrides: Any) -> Settings:
    """Get or create the settings instance.

    Args:
        config_file: Optional path to YAML configuration file
        **overrides: Additional settings to override

    Returns:
        Settings instance
    """
    global _settings

    if _settings is None or config_file is not None or overrides:
        settings_data: dict[str, Any] = {}
        if config_file:
            settings_data["config_file"] = config_file
        settings_data.update(overrides)
        _settings = Settings(**settings_data)

    return _settings


def reset_settings() -> None:
    """Reset the global settings instance (useful for testing)."""
    global _settings
    _settings = None
