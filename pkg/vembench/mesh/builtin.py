from __future__ import annotations

from typing import Callable

import numpy as np

from vembench.errors import UnknownNameError
from vembench.mesh.geometry import BezierCurve, Mesh, build_mesh

VORONOI_SEEDS = np.array(
    [
        [0.2, 0.3],
        [0.8, 0.2],
        [0.5, 0.55],
        [0.15, 0.8],
        [0.82, 0.78],
    ]
)
OCTAGON_RADIUS = 0.35
OCTAGON_CENTER = np.array([0.5, 0.5])
BEZIER_CONTROL_POINTS = np.array([[0.0, 0.5], [0.25, 0.25], [0.75, 0.75], [1.0, 0.5]])
CONSTRUCTION_MERGE_TOL = 1e-10


def quad_mesh() -> Mesh:
    vertices = [[i / 2, j / 2] for j in range(3) for i in range(3)]
    elements = []
    for j in range(2):
        for i in range(2):
            a = i + 3 * j
            cycle = [a, a + 1, a + 4, a + 3]
            elements.append([(cycle[n], cycle[(n + 1) % 4], None) for n in range(4)])
    return build_mesh("quad", vertices, elements)


def _clip(polygon: list[np.ndarray], normal: np.ndarray, offset: float) -> list[np.ndarray]:
    """Keep the half-plane normal . x <= offset (Sutherland-Hodgman, one plane)."""
    clipped: list[np.ndarray] = []
    count = len(polygon)
    for index in range(count):
        current = polygon[index]
        following = polygon[(index + 1) % count]
        current_in = normal @ current <= offset
        following_in = normal @ following <= offset
        if current_in:
            clipped.append(current)
        if current_in != following_in:
            denominator = normal @ (following - current)
            ratio = (offset - normal @ current) / denominator
            clipped.append(current + ratio * (following - current))
    return clipped


def _dedupe_cycle(polygon: list[np.ndarray], tol: float) -> list[np.ndarray]:
    result: list[np.ndarray] = []
    for point in polygon:
        if result and np.linalg.norm(point - result[-1]) <= tol:
            continue
        result.append(point)
    while len(result) > 1 and np.linalg.norm(result[0] - result[-1]) <= tol:
        result.pop()
    return result


def voronoi_cells(seeds: np.ndarray) -> list[list[np.ndarray]]:
    cells = []
    square = [np.array(p, dtype=float) for p in ([0, 0], [1, 0], [1, 1], [0, 1])]
    for i, seed in enumerate(seeds):
        polygon = list(square)
        for j, other in enumerate(seeds):
            if i == j:
                continue
            normal = other - seed
            offset = 0.5 * (other @ other - seed @ seed)
            polygon = _clip(polygon, normal, offset)
        cells.append(_dedupe_cycle(polygon, CONSTRUCTION_MERGE_TOL))
    return cells


def _snap(value: float) -> float:
    for target in (0.0, 0.5, 1.0):
        if abs(value - target) <= CONSTRUCTION_MERGE_TOL:
            return target
    return value


def voronoi5_mesh() -> Mesh:
    vertices: list[np.ndarray] = []

    def vertex_id(point: np.ndarray) -> int:
        for index, existing in enumerate(vertices):
            if np.linalg.norm(existing - point) <= CONSTRUCTION_MERGE_TOL:
                return index
        vertices.append(np.array([_snap(point[0]), _snap(point[1])]))
        return len(vertices) - 1

    elements = []
    for cell in voronoi_cells(VORONOI_SEEDS):
        ids = [vertex_id(point) for point in cell]
        elements.append([(ids[n], ids[(n + 1) % len(ids)], None) for n in range(len(ids))])
    return build_mesh("voronoi5", np.array(vertices), elements)


def _boundary_point(angle: float) -> np.ndarray:
    direction = np.array([np.cos(angle), np.sin(angle)])
    # ray from the center to the unit-square boundary
    scale = 0.5 / np.max(np.abs(direction))
    point = OCTAGON_CENTER + scale * direction
    return np.array([_snap(point[0]), _snap(point[1])])


def octagon_mesh() -> Mesh:
    step = np.pi / 4
    corners = [OCTAGON_CENTER + OCTAGON_RADIUS * np.array([np.cos(step / 2 + step * j), np.sin(step / 2 + step * j)]) for j in range(8)]
    midpoints = [0.5 * (corners[j - 1] + corners[j]) for j in range(8)]
    outer = [_boundary_point(step * j) for j in range(8)]

    # ids: corners 0..7, edge midpoints 8..15, outer points 16..23
    vertices = np.array(corners + midpoints + outer)
    corner_id = lambda j: j % 8  # noqa: E731
    midpoint_id = lambda j: 8 + j % 8  # noqa: E731
    outer_id = lambda j: 16 + j % 8  # noqa: E731

    central = []
    for j in range(8):
        central.append((midpoint_id(j), corner_id(j), None))
        central.append((corner_id(j), midpoint_id(j + 1), None))
    elements = [central]
    for j in range(8):
        cycle = [midpoint_id(j), outer_id(j), outer_id(j + 1), midpoint_id(j + 1), corner_id(j)]
        elements.append([(cycle[n], cycle[(n + 1) % 5], None) for n in range(5)])
    return build_mesh("octagon", vertices, elements)


def bezier4_mesh() -> Mesh:
    left, right = BezierCurve(BEZIER_CONTROL_POINTS).split(0.5)
    vertices = [
        [0.0, 0.0],
        [0.5, 0.0],
        [1.0, 0.0],
        [1.0, 0.5],
        [1.0, 1.0],
        [0.5, 1.0],
        [0.0, 1.0],
        [0.0, 0.5],
        left.control_points[-1],
    ]
    left_points = left.control_points
    right_points = right.control_points
    elements = [
        [(0, 1, None), (1, 8, None), (8, 7, left_points[::-1]), (7, 0, None)],
        [(1, 2, None), (2, 3, None), (3, 8, right_points[::-1]), (8, 1, None)],
        [(8, 3, right_points), (3, 4, None), (4, 5, None), (5, 8, None)],
        [(7, 8, left_points), (8, 5, None), (5, 6, None), (6, 7, None)],
    ]
    return build_mesh("bezier4", np.array(vertices, dtype=float), elements)


BUILTIN_MESHES: dict[str, Callable[[], Mesh]] = {
    "quad": quad_mesh,
    "voronoi5": voronoi5_mesh,
    "octagon": octagon_mesh,
    "bezier4": bezier4_mesh,
}


def builtin_mesh(name: str) -> Mesh:
    try:
        factory = BUILTIN_MESHES[name]
    except KeyError:
        raise UnknownNameError(
            f"Unknown built-in mesh: {name}",
            details={"known": sorted(BUILTIN_MESHES)},
        ) from None
    return factory()
