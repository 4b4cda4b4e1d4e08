from __future__ import annotations

from typing import TypedDict


class ValidationIssueDTO(TypedDict):
    element: int | None
    code: str
    message: str


class ElementSummaryDTO(TypedDict):
    element: int
    n_vertices: int
    area: float
    centroid: tuple[float, float]
    diameter: float
    curved_edges: int


class ErrorRecordDTO(TypedDict):
    err_energy: float
    err_l2: float
    err_pressure: float | None


class AugmentationDiagnosticsDTO(TypedDict):
    element: int
    ell: int
    rank: int
    target_rank: int
    n_dofs: int
    tolerance: float
