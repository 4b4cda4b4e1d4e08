from __future__ import annotations

from vembench.config import Config

ALLOWED_LOG_LEVELS = {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}


def validate_startup_config(config: Config) -> None:
    if config.log_level not in ALLOWED_LOG_LEVELS:
        raise RuntimeError(f"LOG_LEVEL must be one of: {', '.join(sorted(ALLOWED_LOG_LEVELS))}.")
    if config.BENCH_WORKERS <= 0:
        raise RuntimeError("BENCH_WORKERS must be greater than 0.")
    for name in ("TAU_LAPLACE", "TAU_ELASTICITY", "TAU_STOKES"):
        if getattr(config, name) <= 0:
            raise RuntimeError(f"{name} must be greater than 0.")
    if config.RANK_TOL_MULTIPLIER <= 0:
        raise RuntimeError("RANK_TOL_MULTIPLIER must be greater than 0.")
    if config.ELL_MAX < 1:
        raise RuntimeError("ELL_MAX must be greater than or equal to 1.")
    if config.DIVERGENCE_FACTOR <= 1:
        raise RuntimeError("DIVERGENCE_FACTOR must be greater than 1.")
    for name in ("QUAD_SURPLUS", "VC_QUAD_SURPLUS", "ERROR_QUAD_SURPLUS", "MGS_REORTH_DEGREE"):
        if getattr(config, name) < 0:
            raise RuntimeError(f"{name} must be greater than or equal to 0.")
    if not 0 < config.MESH_MERGE_TOL < 1e-3:
        raise RuntimeError("MESH_MERGE_TOL must be in (0, 1e-3).")
    if config.STOKES_VISCOSITY <= 0:
        raise RuntimeError("STOKES_VISCOSITY must be greater than 0.")
    if config.YOUNG_MODULUS <= 0:
        raise RuntimeError("YOUNG_MODULUS must be greater than 0.")
    if not -1.0 < config.POISSON_RATIO < 0.5:
        raise RuntimeError("POISSON_RATIO must be in (-1, 0.5).")
