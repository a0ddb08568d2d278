"""
==============================================================================
Application Settings Module
==============================================================================

Configuration management for the nlica toolkit using Pydantic Settings.

A single cached Settings instance carries every numerical tolerance and
default used by the library, so that tests and the CLI can override them
through environment variables or a local .env file.

Features:
---------
- Environment variable loading with type validation
- .env file support for local experimentation
- Computed path properties for run outputs and bundled experiments
- Cached singleton accessor

Configuration Priority (highest to lowest):
------------------------------------------
1. Environment variables (e.g. DEFAULT_DEPTH=6, THREADS=4)
2. .env file
3. Default values

==============================================================================
"""

from __future__ import annotations

import logging
from functools import lru_cache
from pathlib import Path

from pydantic import Field, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


# Module logger
logger = logging.getLogger(__name__)


class Settings(BaseSettings):
    """
    Toolkit settings loaded from environment variables.

    Attributes:
        app_name: Display name used in logs and manifests
        app_env: Environment mode (development/staging/production)
        debug: Enable verbose logging
        default_depth: Signature truncation depth M when none is given
        default_mu: Maximal cross-word length when none is given
        norm_epsilon: Lower bound on diagonal cumulants for standardization
        domain_penalty: Objective value reported for infeasible parameters
        divergence_threshold: Objective value at which sgd aborts
        fd_step: Relative step of finite-difference optimizer gradients
        jacobian_fd_step: Step of finite-difference Jacobians
        monomial_tol: Magnitude above which a Jacobian entry counts as nonzero
        cholesky_jitter: Diagonal jitter added once on factorization failure
        threads: Worker cap for path-parallel computations
        chunk_size: Paths per worker chunk
        batch_paths: Paths per stochastic gradient step
        null_threshold: Contrast level below which a sample is treated as IC
        contrastivity_gap_tol: Relative gap separating distinct ratios
        separability_tol: Magnitude below which a mixed log-derivative vanishes
        output_directory: Root directory for run artifacts
        experiments_directory: Directory holding bundled experiment configs

    Example:
        >>> settings = Settings()
        >>> settings.default_depth
        5
    """

    # =========================================================================
    # PYDANTIC SETTINGS CONFIGURATION
    # =========================================================================
    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
        validate_default=True,
    )

    # =========================================================================
    # APPLICATION SETTINGS
    # =========================================================================
    app_name: str = Field(
        default="nlica",
        description="Display name used in logs and manifests"
    )

    app_env: str = Field(
        default="development",
        description="Environment mode: development, staging, production"
    )

    debug: bool = Field(
        default=False,
        description="Enable debug logging"
    )

    # =========================================================================
    # SIGNATURE SETTINGS
    # =========================================================================
    default_depth: int = Field(
        default=5,
        ge=1,
        le=12,
        description="Signature truncation depth M"
    )

    default_mu: int = Field(
        default=5,
        ge=2,
        le=12,
        description="Maximal length of cross words entering the contrast"
    )

    norm_epsilon: float = Field(
        default=1e-12,
        gt=0,
        description="Diagonal cumulants at or below this value are degenerate"
    )

    # =========================================================================
    # OPTIMIZER SETTINGS
    # =========================================================================
    domain_penalty: float = Field(
        default=1e6,
        gt=0,
        description="Objective value for parameters outside the family domain"
    )

    divergence_threshold: float = Field(
        default=1e8,
        gt=0,
        description="Objective value at which stochastic descent aborts"
    )

    fd_step: float = Field(
        default=1e-4,
        gt=0,
        description="Relative central-difference step for gradients"
    )

    batch_paths: int = Field(
        default=64,
        ge=1,
        description="Paths subsampled per stochastic gradient step"
    )

    # =========================================================================
    # NUMERICAL TOLERANCES
    # =========================================================================
    jacobian_fd_step: float = Field(
        default=1e-5,
        gt=0,
        description="Central-difference step for Jacobians"
    )

    monomial_tol: float = Field(
        default=1e-6,
        gt=0,
        description="Jacobian entries above this magnitude count as nonzero"
    )

    cholesky_jitter: float = Field(
        default=1e-10,
        gt=0,
        description="Diagonal jitter for a second Cholesky attempt"
    )

    null_threshold: float = Field(
        default=0.4,
        gt=0,
        description="Contrast level under which samples are treated as IC (depth = mu = 5, 512 paths)"
    )

    contrastivity_gap_tol: float = Field(
        default=1e-6,
        gt=0,
        description="Relative gap for pairwise distinct ratios"
    )

    separability_tol: float = Field(
        default=1e-6,
        gt=0,
        description="Mixed log-derivatives below this magnitude vanish"
    )

    # =========================================================================
    # CONCURRENCY SETTINGS
    # =========================================================================
    threads: int = Field(
        default=1,
        ge=1,
        le=256,
        description="Worker cap for path-parallel computations"
    )

    chunk_size: int = Field(
        default=64,
        ge=1,
        description="Paths per worker chunk"
    )

    # =========================================================================
    # FILE PATH SETTINGS
    # =========================================================================
    output_directory: str = Field(
        default="storage/runs",
        description="Root directory for run artifacts"
    )

    experiments_directory: str = Field(
        default="data/experiments",
        description="Directory holding bundled experiment configs"
    )

    # =========================================================================
    # VALIDATORS
    # =========================================================================
    @field_validator("app_env")
    @classmethod
    def validate_app_env(cls, value: str) -> str:
        """
        Validate and normalize application environment.

        Args:
            value: Raw environment value

        Returns:
            Lowercase normalized environment name
        """
        valid_envs = {"development", "staging", "production"}
        normalized = value.lower().strip()

        if normalized not in valid_envs:
            logger.warning(
                f"Unknown environment '{value}', defaulting to 'development'"
            )
            return "development"

        return normalized

    @model_validator(mode="after")
    def validate_mu_within_depth(self) -> "Settings":
        """Reject a default cross-word length beyond the default depth."""
        if self.default_mu > self.default_depth:
            raise ValueError("default_mu exceeds default_depth")
        return self

    # =========================================================================
    # COMPUTED PROPERTIES
    # =========================================================================
    @property
    def output_path(self) -> Path:
        """Get the run artifact root as a Path."""
        return Path(self.output_directory)

    @property
    def experiments_path(self) -> Path:
        """Get the bundled experiment directory as a Path."""
        return Path(self.experiments_directory)

    # =========================================================================
    # UTILITY METHODS
    # =========================================================================
    def ensure_directories(self) -> None:
        """Create the run artifact root if it does not exist."""
        self.output_path.mkdir(parents=True, exist_ok=True)
        logger.debug("Output directory created/verified")

    def __repr__(self) -> str:
        """String representation for debugging."""
        return (
            f"Settings(app_name={self.app_name!r}, "
            f"app_env={self.app_env!r}, "
            f"threads={self.threads}, "
            f"debug={self.debug})"
        )


# =============================================================================
# SINGLETON INSTANCE MANAGEMENT
# =============================================================================

@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """
    Get the global Settings instance.

    Returns:
        Cached Settings instance

    Example:
        >>> get_settings().norm_epsilon
        1e-12
    """
    settings = Settings()

    if settings.debug:
        logger.info(f"Configuration loaded: {settings}")

    return settings
