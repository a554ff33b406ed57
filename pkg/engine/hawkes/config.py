import os
from pathlib import Path

from dotenv import load_dotenv
from pydantic import field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_prefix="HAWKES_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Application
    app_name: str = "motor-hawkes"
    environment: str = "development"
    debug: bool = False

    # Logging
    log_level: str = "INFO"
    log_to_file: bool = False
    log_dir: Path = Path("logs")

    # Numerics: transforms
    grid_steps: int = 512
    fixed_point_tol: float = 1e-10
    fixed_point_max_iter: int = 200
    mark_coupling: str = "shared"

    # Numerics: moments
    moment_tol: float = 1e-12
    stencil_step: float = 1e-4
    variance_clip: float = 1e-6

    # Numerics: primitives
    lst_abs_tol: float = 1e-10
    power_iteration_tol: float = 1e-12
    power_iteration_max_iter: int = 10_000
    tie_rtol: float = 1e-12
    aliasing_tol: float = 1e-6

    # Simulation
    seed: int = 20240601
    mc_runs: int = 10_000
    max_events: int = 1_000_000

    # Parallelism
    threads: int = 1
    slow_operation_threshold: float = 5.0

    @field_validator("fixed_point_tol", "moment_tol", "stencil_step", "lst_abs_tol",
                     "power_iteration_tol", "tie_rtol", "aliasing_tol")
    @classmethod
    def validate_positive(cls, v):
        if not v > 0:
            raise ValueError("tolerances and steps must be positive")
        return v

    @field_validator("grid_steps")
    @classmethod
    def validate_grid_steps(cls, v):
        if v < 2:
            raise ValueError("grid_steps must be at least 2")
        return v

    @field_validator("threads")
    @classmethod
    def validate_threads(cls, v):
        if v < 0:
            raise ValueError("threads must be >= 0 (0 = all physical cores)")
        return v

    @field_validator("mark_coupling")
    @classmethod
    def validate_mark_coupling(cls, v):
        if v not in ("shared", "independent"):
            raise ValueError("mark_coupling must be 'shared' or 'independent'")
        return v

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v):
        return v.upper()


# Environment-specific configurations
class DevelopmentSettings(Settings):
    debug: bool = True
    log_level: str = "DEBUG"


class ProductionSettings(Settings):
    debug: bool = False
    log_level: str = "WARNING"
    log_to_file: bool = True


class TestingSettings(Settings):
    debug: bool = True
    log_level: str = "DEBUG"
    mc_runs: int = 2_000  # Smaller default for tests


def get_environment_settings() -> Settings:
    """Get settings based on environment"""
    environment = (os.getenv("HAWKES_ENVIRONMENT") or os.getenv("ENVIRONMENT", "development")).lower()

    if environment == "production":
        return ProductionSettings(environment=environment)
    elif environment == "testing":
        return TestingSettings(environment=environment)
    else:
        return DevelopmentSettings(environment=environment)


# ENVIRONMENT may come from .env like the HAWKES_ variables
load_dotenv()

# Global settings instance
settings = get_environment_settings()


def get_settings() -> Settings:
    """Get engine settings"""
    return settings


def reload_settings() -> Settings:
    """Re-resolve the global settings after the environment changed"""
    global settings
    settings = get_environment_settings()
    return settings
