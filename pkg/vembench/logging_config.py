"""Structured logging for benchmark runs.

Records go to stderr; stdout is reserved for CSV results.
"""

from __future__ import annotations

import json
import logging
import math
import sys
from datetime import datetime, timezone
from typing import Any


class JsonFormatter(logging.Formatter):
    """One JSON object per record, carrying the run fields passed via ``extra=``."""

    EXTRA_FIELDS = (
        "run_id",
        "mesh",
        "problem",
        "formulation",
        "k",
        "ell",
        "tau",
        "err_energy",
        "status",
        "duration_ms",
        "element",
    )

    def format(self, record: logging.LogRecord) -> str:
        payload: dict[str, Any] = {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
        }
        for field in self.EXTRA_FIELDS:
            value = getattr(record, field, None)
            if value is not None:
                payload[field] = _finite_or_text(value)
        if record.exc_info:
            payload["exc_info"] = self.formatException(record.exc_info)
        return json.dumps(payload, ensure_ascii=False)


def _finite_or_text(value: Any) -> Any:
    # nan/inf are not valid JSON
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return value


def resolve_level(level: str) -> int:
    """Numeric level for ``level``; unknown names fall back to INFO so startup validation can report them."""
    resolved = logging.getLevelName((level or "INFO").strip().upper())
    return resolved if isinstance(resolved, int) else logging.INFO


def configure_logging(*, level: str = "INFO", json_logs: bool = True) -> None:
    root = logging.getLogger()
    numeric = resolve_level(level)
    if getattr(root, "_vembench_logging_configured", False):
        root.setLevel(numeric)
        return

    root.handlers.clear()
    handler = logging.StreamHandler(sys.stderr)
    if json_logs:
        handler.setFormatter(JsonFormatter())
    else:
        handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s %(message)s"))

    root.addHandler(handler)
    root.setLevel(numeric)
    root._vembench_logging_configured = True  # type: ignore[attr-defined]
