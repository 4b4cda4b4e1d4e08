from __future__ import annotations

from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

MESH_FORMAT = "vem-mesh-1"
RESULT_COLUMNS = (
    "mesh",
    "problem",
    "formulation",
    "k",
    "tau",
    "tol",
    "l_max",
    "err_energy",
    "err_l2",
    "err_pressure",
    "cond",
    "diverged",
    "seconds",
)


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class EdgeDocument(StrictModel):
    v: tuple[int, int]
    bezier: Optional[list[tuple[float, float]]] = None

    @field_validator("bezier")
    @classmethod
    def check_bezier(cls, value: Optional[list[tuple[float, float]]]) -> Optional[list[tuple[float, float]]]:
        if value is not None and len(value) < 2:
            raise ValueError("bezier edges need at least two control points")
        return value


class ElementDocument(StrictModel):
    edges: list[EdgeDocument] = Field(min_length=1)


class MeshDocument(StrictModel):
    version: Literal["vem-mesh-1"] = MESH_FORMAT
    name: str = "mesh"
    vertices: list[tuple[float, float]] = Field(min_length=3)
    elements: list[ElementDocument] = Field(min_length=1)

    @model_validator(mode="after")
    def check_vertex_ids(self) -> "MeshDocument":
        count = len(self.vertices)
        for position, element in enumerate(self.elements):
            for edge in element.edges:
                if any(index < 0 or index >= count for index in edge.v):
                    raise ValueError(f"element {position} references a vertex outside 0..{count - 1}")
        return self


class BenchRequest(StrictModel):
    mesh: str
    problem: Literal["laplace", "elasticity", "stokes"]
    formulations: list[str] = Field(min_length=1)
    k_min: int = Field(ge=1)
    k_max: int = Field(ge=1)
    taus: list[float | Literal["mean"]] = Field(default_factory=list)
    tol_multipliers: list[float] = Field(default_factory=list)
    coefficient: Optional[str] = None
    case: Literal["sin", "poly"] = "sin"

    @model_validator(mode="after")
    def check_range(self) -> "BenchRequest":
        if self.k_max < self.k_min:
            raise ValueError("k_max must not be below k_min")
        for tau in self.taus:
            if not isinstance(tau, str) and not tau > 0:
                raise ValueError("tau values must be positive")
        for multiplier in self.tol_multipliers:
            if not multiplier > 0:
                raise ValueError("tolerance multipliers must be positive")
        return self

    @property
    def degrees(self) -> list[int]:
        return list(range(self.k_min, self.k_max + 1))


class BenchResultRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    mesh: str
    problem: str
    formulation: str
    k: int
    tau: Optional[Union[float, Literal["mean"]]] = None
    tol: Optional[float] = None
    l_max: int = 0
    err_energy: float
    err_l2: float
    err_pressure: Optional[float] = None
    cond: float
    diverged: bool = False
    seconds: float = Field(ge=0.0)

    def to_csv_record(self) -> dict[str, str]:
        record: dict[str, str] = {}
        for column in RESULT_COLUMNS:
            value = getattr(self, column)
            if value is None:
                record[column] = ""
            elif isinstance(value, bool):
                record[column] = "1" if value else "0"
            elif isinstance(value, float):
                record[column] = repr(value)
            else:
                record[column] = str(value)
        return record
