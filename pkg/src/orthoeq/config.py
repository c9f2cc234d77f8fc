"""Numerical defaults and environment configuration."""

import os
from functools import lru_cache

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from orthoeq.exceptions import ConfigurationError

# Load environment variables from .env file
load_dotenv()

# Relative singular-value threshold for rank decisions.
DEFAULT_RANK_TOL = 1e-10
# Entrywise tolerance on basisᵀ·basis = I.
ORTHONORMAL_TOL = 1e-12
CONTAINMENT_TOL = 1e-10
# Distance at which a section table key counts as a hit.
LOOKUP_TOL = 1e-9
DUPLICATE_INPUT_TOL = 1e-12
WELL_DEFINED_TOL = 1e-10
CONDITION_LIMIT = 1e8
IDENTITY_TOL = 1e-8
VERIFY_TOL = 1e-8
SYMMETRY_TOL = 1e-12


class Settings(BaseModel):
    """Runtime settings read from the environment."""

    model_config = ConfigDict(frozen=True)

    tol: float = Field(default=VERIFY_TOL, gt=0, description="Default CLI residual tolerance")
    rank_tol: float = Field(
        default=DEFAULT_RANK_TOL, gt=0, description="Relative rank threshold for spans"
    )
    log_level: str = Field(default="WARNING", description="Root log level for the CLI")
    grid_size: int = Field(default=12, ge=1, description="Samples per generated map")


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Get the settings for this process.

    Values come from OEQ_TOL, OEQ_RANK_TOL, OEQ_LOG_LEVEL and OEQ_GRID_SIZE,
    falling back to the module defaults.

    Returns:
        The cached Settings instance.

    Raises:
        ConfigurationError: If an environment value does not validate.
    """
    raw = {
        "tol": os.getenv("OEQ_TOL"),
        "rank_tol": os.getenv("OEQ_RANK_TOL"),
        "log_level": os.getenv("OEQ_LOG_LEVEL"),
        "grid_size": os.getenv("OEQ_GRID_SIZE"),
    }
    try:
        return Settings(**{key: value for key, value in raw.items() if value is not None})
    except ValidationError as e:
        raise ConfigurationError(f"Invalid OEQ_* environment configuration: {e}") from e
