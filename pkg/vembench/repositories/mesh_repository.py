from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from vembench.errors import MeshParseError
from vembench.mesh.builtin import BUILTIN_MESHES, builtin_mesh
from vembench.mesh.geometry import Mesh, build_mesh
from vembench.mesh.validation import DEFAULT_MERGE_TOL, ensure_valid, merge_duplicate_vertices
from vembench.schemas import EdgeDocument, ElementDocument, MeshDocument


def mesh_to_document(mesh: Mesh) -> MeshDocument:
    elements = []
    for element in mesh.elements:
        edges = []
        for edge in element.edges:
            bezier = None
            if edge.curve is not None:
                bezier = [(float(x), float(y)) for x, y in edge.curve.control_points]
            edges.append(EdgeDocument(v=edge.vertex_ids, bezier=bezier))
        elements.append(ElementDocument(edges=edges))
    return MeshDocument(
        name=mesh.name,
        vertices=[(float(x), float(y)) for x, y in mesh.vertices],
        elements=elements,
    )


def mesh_from_document(document: MeshDocument, *, merge_tol: float = DEFAULT_MERGE_TOL) -> Mesh:
    specs = [
        [(edge.v[0], edge.v[1], None if edge.bezier is None else np.array(edge.bezier)) for edge in element.edges]
        for element in document.elements
    ]
    vertices, merged, warnings = merge_duplicate_vertices(np.array(document.vertices, dtype=float), specs, tol=merge_tol)
    return build_mesh(document.name, vertices, merged, warnings=warnings)


class JsonMeshRepository:
    """Reads and writes ``vem-mesh-1`` documents; bare names resolve to the built-in meshes."""

    def __init__(self, *, merge_tol: float = DEFAULT_MERGE_TOL) -> None:
        self.merge_tol = merge_tol

    def resolve(self, name_or_path: str | Path, *, validate: bool = True) -> Mesh:
        if str(name_or_path) in BUILTIN_MESHES:
            return builtin_mesh(str(name_or_path))
        return self.load(name_or_path, validate=validate)

    def load(self, path: str | Path, *, validate: bool = True) -> Mesh:
        path = Path(path)
        try:
            raw = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise MeshParseError(f"Cannot read mesh file: {path}", details={"reason": str(exc)}) from exc
        try:
            document = MeshDocument.model_validate_json(raw)
        except ValidationError as exc:
            raise MeshParseError(
                f"Malformed mesh document: {path}",
                details=[{"loc": list(error["loc"]), "msg": error["msg"]} for error in exc.errors()],
            ) from exc
        if document.name == "mesh":
            document = document.model_copy(update={"name": path.stem})
        mesh = mesh_from_document(document, merge_tol=self.merge_tol)
        return ensure_valid(mesh) if validate else mesh

    def save(self, mesh: Mesh, path: str | Path) -> None:
        payload = mesh_to_document(mesh).model_dump(mode="json", exclude_none=True)
        Path(path).write_text(json.dumps(payload, indent=2), encoding="utf-8")
