"""Configuration management for lamerecon."""

from pathlib import Path
from typing import Dict, Union

from dotenv import dotenv_values, load_dotenv
from pydantic import Field, ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from .errors import ContractViolation

# Load environment variables
load_dotenv()


class Settings(BaseSettings):
    """Library-wide defaults, overridable through LAMERECON_* variables."""

    # Logging Configuration
    log_level: str = Field("INFO")
    log_file: str = Field("")

    # Elimination / recovery thresholds
    sigma_min_rel: float = Field(1e-3, gt=0)
    kappa_rel: float = Field(1e-3, gt=0)
    transport_cond_cap: float = Field(1e6, gt=0)
    solver_cond_cap: float = Field(1e12, gt=0)
    subset_cap: int = Field(200, gt=0)

    # Recovery numerics
    ray_step_factor: float = Field(0.5, gt=0, le=1.0)
    ray_sources: int = Field(8, gt=0)
    ls_regularization: float = Field(1e-2, gt=0)

    # CGO amplitude solver
    dbar_padding: float = Field(0.25, ge=0.25)
    dbar_rtol: float = Field(1e-12, gt=0)
    dbar_maxiter: int = Field(400, gt=0)
    amplitude_tolerance: float = Field(1e-6, gt=0)
    frame_cells: int = Field(3, ge=0)

    model_config = SettingsConfigDict(
        env_prefix="LAMERECON_",
        env_file=".env",
        case_sensitive=False,
        extra="ignore",
    )


def read_key_values(path: Union[str, Path]) -> Dict[str, str]:
    """Read a flat KEY=value file into a lower-cased dictionary."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Config file not found: {path}")
    raw = dotenv_values(path)
    return {key.strip().lower(): value for key, value in raw.items() if value is not None}


def load_pipeline_config(path: Union[str, Path]):
    """Load a flat key-value pipeline config into a validated PipelineConfig."""
    from .models.types import PipelineConfig

    values = read_key_values(path)
    try:
        return PipelineConfig.model_validate(values)
    except ValidationError as e:
        raise ContractViolation(f"Invalid pipeline config {path}: {e}") from e


# Global settings instance
settings = Settings()
