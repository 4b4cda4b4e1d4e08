from vembench.mesh.builtin import BUILTIN_MESHES, builtin_mesh
from vembench.mesh.geometry import (
    BezierCurve,
    Edge,
    Element,
    Mesh,
    bezier_derivative,
    bezier_eval,
    build_mesh,
    element_geometry,
)
from vembench.mesh.validation import ValidationReport, ensure_valid, merge_duplicate_vertices, validate_mesh

__all__ = [
    "BUILTIN_MESHES",
    "BezierCurve",
    "Edge",
    "Element",
    "Mesh",
    "ValidationReport",
    "bezier_derivative",
    "bezier_eval",
    "build_mesh",
    "builtin_mesh",
    "element_geometry",
    "ensure_valid",
    "merge_duplicate_vertices",
    "validate_mesh",
]
