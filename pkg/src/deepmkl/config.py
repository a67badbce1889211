import os
from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, PydanticBaseSettingsSource, SettingsConfigDict, TomlConfigSettingsSource

LogLevel = Literal["TRACE", "DEBUG", "INFO", "SUCCESS", "WARNING", "ERROR"]


class Config(BaseSettings):
    model_config = SettingsConfigDict(
        env_prefix="DEEPMKL_",
        toml_file=os.path.expanduser("~/.config/deepmkl/config.toml"),
        extra="ignore",
    )

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> tuple[PydanticBaseSettingsSource, ...]:
        return (
            init_settings,
            env_settings,
            TomlConfigSettingsSource(settings_cls),
            file_secret_settings,
        )

    c_svm: float = Field(
        default=10.0,
        gt=0,
        description="SVM box constraint C",
    )

    eta: float = Field(
        default=0.1,
        gt=0,
        description="Span regularizer added as eta/alpha_i on the support-vector diagonal",
    )

    span_c: float = Field(
        default=5.0,
        gt=0,
        description="Slope c of the smoothing sigmoid phi(x) = 1/(1 + exp(-c x + d))",
    )

    span_d: float = Field(
        default=0.0,
        description="Offset d of the smoothing sigmoid",
    )

    step_size: float = Field(
        default=0.05,
        ge=0,
        le=1,
        description="Gradient step size applied to every kernel weight unless overridden per kernel",
    )

    max_iters: int = Field(
        default=500,
        ge=1,
        description="Maximum number of alternating SVM / weight-update iterations",
    )

    stop_tol: float = Field(
        default=1e-6,
        ge=0,
        description="Relative objective change across the stop window that counts as a stall",
    )

    stop_window: int = Field(
        default=10,
        ge=1,
        description="Number of iterations the stall criterion looks back over",
    )

    max_skips: int = Field(
        default=20,
        ge=1,
        description="Consecutive degenerate iterations (fewer than 2 support vectors) before training aborts",
    )

    sv_threshold: float = Field(
        default=1e-6,
        gt=0,
        description="Dual coefficients above this value mark a support vector",
    )

    smo_tol: float = Field(
        default=1e-3,
        gt=0,
        description="KKT violation tolerance of the SMO solver",
    )

    smo_max_updates: int = Field(
        default=10_000_000,
        ge=1,
        description="Cap on SMO pair updates before the solver reports non-convergence",
    )

    train_fraction: float = Field(
        default=0.5,
        gt=0,
        lt=1,
        description="Fraction of rows placed in the training half of a split",
    )

    workers: int = Field(
        default=1,
        ge=1,
        description="Worker processes used by the benchmark grid. 1 runs every cell in-process.",
    )

    log_level: LogLevel = Field(
        default="INFO",
        description="Minimum level written to stderr by the CLI",
    )


config = Config()
