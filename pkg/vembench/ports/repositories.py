from __future__ import annotations

from pathlib import Path
from typing import Iterable, Protocol

from vembench.mesh.geometry import Mesh
from vembench.schemas import BenchResultRow


class MeshRepositoryPort(Protocol):
    def resolve(self, name_or_path: str | Path, *, validate: bool = True) -> Mesh:
        ...

    def load(self, path: str | Path, *, validate: bool = True) -> Mesh:
        ...

    def save(self, mesh: Mesh, path: str | Path) -> None:
        ...


class ResultSinkPort(Protocol):
    def append(self, row: BenchResultRow) -> None:
        ...

    def extend(self, rows: Iterable[BenchResultRow]) -> None:
        ...
