from __future__ import annotations

from pydantic_settings import BaseSettings, SettingsConfigDict


class Config(BaseSettings):
    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    LOG_LEVEL: str = "INFO"
    LOG_JSON: bool = True
    METRICS_ENABLED: bool = True

    BENCH_WORKERS: int = 1
    TAU_LAPLACE: float = 1.0
    TAU_ELASTICITY: float = 0.5
    TAU_STOKES: float = 1.0
    RANK_TOL_MULTIPLIER: float = 1.0
    ELL_MAX: int = 25
    DIVERGENCE_FACTOR: float = 1e3

    QUAD_SURPLUS: int = 2
    VC_QUAD_SURPLUS: int = 8
    ERROR_QUAD_SURPLUS: int = 8
    MESH_MERGE_TOL: float = 1e-14
    MGS_REORTH_DEGREE: int = 6

    STOKES_VISCOSITY: float = 1.0
    YOUNG_MODULUS: float = 72000.0
    POISSON_RATIO: float = 0.3

    def default_tau(self, problem: str) -> float:
        if problem == "elasticity":
            return self.TAU_ELASTICITY
        if problem == "stokes":
            return self.TAU_STOKES
        return self.TAU_LAPLACE

    @property
    def log_level(self) -> str:
        return (self.LOG_LEVEL or "INFO").strip().upper()


def get_settings() -> Config:
    return Config()
