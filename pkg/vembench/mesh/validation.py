from __future__ import annotations

from dataclasses import dataclass, field
import logging
from typing import Sequence

import numpy as np

from vembench.errors import MeshValidationError
from vembench.mesh.geometry import ENDPOINT_TOL, Mesh, element_geometry
from vembench.ports.dto import ValidationIssueDTO

logger = logging.getLogger("vembench.mesh")

DEFAULT_MERGE_TOL = 1e-14


@dataclass
class ValidationReport:
    mesh: str
    issues: list[ValidationIssueDTO] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues

    def add(self, element: int | None, code: str, message: str) -> None:
        self.issues.append({"element": element, "code": code, "message": message})

    def raise_for_issues(self) -> None:
        if self.issues:
            first = self.issues[0]
            raise MeshValidationError(
                f"Mesh '{self.mesh}' is invalid: {first['message']}",
                details={"issues": self.issues},
            )


def merge_duplicate_vertices(
    vertices: np.ndarray,
    elements: Sequence[Sequence[tuple]],
    *,
    tol: float = DEFAULT_MERGE_TOL,
) -> tuple[np.ndarray, list[list[tuple]], list[str]]:
    """Merge vertices closer than ``tol`` times the bounding-box diagonal."""
    vertices = np.asarray(vertices, dtype=float)
    if vertices.size == 0:
        return vertices, [list(specs) for specs in elements], []
    diagonal = float(np.linalg.norm(vertices.max(axis=0) - vertices.min(axis=0)))
    threshold = tol * max(diagonal, 1.0e-300)

    mapping = np.arange(len(vertices))
    warnings: list[str] = []
    for index in range(len(vertices)):
        if mapping[index] != index:
            continue
        distances = np.linalg.norm(vertices[index + 1:] - vertices[index], axis=1)
        for offset in np.flatnonzero(distances <= threshold):
            other = index + 1 + int(offset)
            if mapping[other] == other:
                mapping[other] = index
                message = f"Vertex {other} merged into vertex {index} (distance {distances[offset]:.3e})."
                warnings.append(message)
                logger.warning(message)

    kept = np.flatnonzero(mapping == np.arange(len(vertices)))
    renumber = {int(old): new for new, old in enumerate(kept)}
    merged_elements = []
    for specs in elements:
        remapped = []
        for spec in specs:
            start, end = renumber[int(mapping[spec[0]])], renumber[int(mapping[spec[1]])]
            remapped.append((start, end, spec[2] if len(spec) > 2 else None))
        merged_elements.append(remapped)
    return vertices[kept], merged_elements, warnings


def _star_shaped(vertices: np.ndarray, centroid: np.ndarray) -> bool:
    count = len(vertices)
    for index in range(count):
        a = vertices[index] - centroid
        b = vertices[(index + 1) % count] - centroid
        if a[0] * b[1] - a[1] * b[0] <= 0.0:
            return False
    return True


def validate_mesh(mesh: Mesh) -> ValidationReport:
    report = ValidationReport(mesh=mesh.name, warnings=list(mesh.warnings))
    for element in mesh.elements:
        index = element.index
        edges = element.edges
        if len(edges) < 3 and not element.is_curved:
            report.add(index, "TOO_FEW_EDGES", f"Element {index} has fewer than three edges.")
            continue
        for position, edge in enumerate(edges):
            following = edges[(position + 1) % len(edges)]
            if edge.vertex_ids[1] != following.vertex_ids[0]:
                report.add(index, "OPEN_BOUNDARY", f"Element {index} boundary is not closed at edge {position}.")
            if edge.vertex_ids[0] == edge.vertex_ids[1]:
                report.add(index, "DEGENERATE_EDGE", f"Element {index} edge {position} has coincident endpoints.")
            if edge.curve is not None:
                control = edge.curve.control_points
                if (
                    np.linalg.norm(control[0] - edge.start) > ENDPOINT_TOL
                    or np.linalg.norm(control[-1] - edge.end) > ENDPOINT_TOL
                ):
                    report.add(
                        index,
                        "CURVE_ENDPOINT_MISMATCH",
                        f"Element {index} edge {position} curve does not end at its vertices.",
                    )
        try:
            area, centroid, _ = element_geometry(element)
        except MeshValidationError:
            report.add(index, "NONPOSITIVE_AREA", f"Element {index} is clockwise or has nonpositive area.")
            continue
        if not element.is_curved and not _star_shaped(element.vertices, centroid):
            report.add(index, "NOT_STAR_SHAPED", f"Element {index} is not star-shaped with respect to its centroid.")

    for key, owners in mesh.edge_incidence.items():
        if len(owners) > 2:
            report.add(owners[0][0], "NON_MANIFOLD_EDGE", f"Edge {key} is shared by more than two elements.")
            continue
        if len(owners) == 2:
            (first, first_local), (second, second_local) = owners
            a = mesh.elements[first].edges[first_local]
            b = mesh.elements[second].edges[second_local]
            if a.vertex_ids != b.vertex_ids[::-1]:
                report.add(first, "INCONSISTENT_ORIENTATION", f"Edge {key} is traversed twice in the same direction.")
            elif a.is_curved != b.is_curved or (
                a.is_curved
                and not np.array_equal(a.canonical().curve.control_points, b.canonical().curve.control_points)
            ):
                report.add(first, "SHARED_EDGE_MISMATCH", f"Edge {key} differs between elements {first} and {second}.")

    logger.debug("mesh validated", extra={"mesh": mesh.name, "status": "ok" if report.ok else "invalid"})
    return report


def ensure_valid(mesh: Mesh) -> Mesh:
    validate_mesh(mesh).raise_for_issues()
    return mesh
