from vembench.bootstrap.validation import validate_startup_config

__all__ = ["validate_startup_config"]
