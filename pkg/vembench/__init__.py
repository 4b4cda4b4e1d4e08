from __future__ import annotations

from vembench.bootstrap.validation import validate_startup_config
from vembench.config import Config, get_settings
from vembench.logging_config import configure_logging
from vembench.version import APP_VERSION

__version__ = APP_VERSION


def create_runtime(config: Config | None = None) -> Config:
    config = config or get_settings()
    configure_logging(level=config.log_level, json_logs=config.LOG_JSON)
    validate_startup_config(config)
    return config


__all__ = ["APP_VERSION", "Config", "create_runtime"]
