from __future__ import annotations

from typing import Any, Optional

import numpy as np

DEFAULT_ERROR_CODES = {
    "DomainError": "DOMAIN_ERROR",
    "MeshValidationError": "MESH_INVALID",
    "MeshParseError": "MESH_PARSE_ERROR",
    "DegenerateElementError": "DEGENERATE_ELEMENT",
    "FormulationError": "FORMULATION_ERROR",
    "SingularSystemError": "SINGULAR_SYSTEM",
    "CoefficientError": "COEFFICIENT_ERROR",
    "UnknownNameError": "UNKNOWN_NAME",
}


class VemError(Exception):
    code = "VEM_ERROR"

    def __init__(self, message: str, *, details: Optional[Any] = None, code: Optional[str] = None) -> None:
        super().__init__(message)
        self.message = message
        self.details = details
        if code is not None:
            self.code = code

    def to_payload(self) -> dict[str, Any]:
        return build_error_payload(code=self.code, message=self.message, details=self.details)


class DomainError(VemError, ValueError):
    code = "DOMAIN_ERROR"


class MeshValidationError(VemError):
    code = "MESH_INVALID"


class MeshParseError(VemError):
    code = "MESH_PARSE_ERROR"


class DegenerateElementError(VemError):
    code = "DEGENERATE_ELEMENT"


class FormulationError(VemError):
    code = "FORMULATION_ERROR"


class SingularSystemError(VemError):
    code = "SINGULAR_SYSTEM"


class CoefficientError(VemError):
    code = "COEFFICIENT_ERROR"


class UnknownNameError(VemError, KeyError):
    code = "UNKNOWN_NAME"

    def __str__(self) -> str:
        return self.message


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(key): _jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, np.generic):
        return value.item()
    return value


def build_error_payload(
    *,
    code: str,
    message: str,
    details: Optional[Any] = None,
) -> dict[str, Any]:
    payload: dict[str, Any] = {
        "code": code,
        "message": message,
    }
    if details is not None:
        payload["details"] = _jsonable(details)
    return payload


def error_code_for(exc: BaseException) -> str:
    if isinstance(exc, VemError):
        return exc.code
    return DEFAULT_ERROR_CODES.get(type(exc).__name__, "INTERNAL_ERROR")
