"""Polygonal mesh geometry with straight and Bezier edges.

Conventions
- Every curved edge is parametrized on t in [0, 1].
- Element edges are stored counterclockwise; the interior lies left of traversal.
- Edges carry global vertex ids so shared edges can be oriented canonically
  (smaller id first) when generating edge nodes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from math import comb
from typing import Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from vembench.errors import DomainError, MeshValidationError

ENDPOINT_TOL = 1e-12
DIAMETER_CURVE_SAMPLES = 32


def _as_parameter(t: float | np.ndarray) -> np.ndarray:
    values = np.asarray(t, dtype=float)
    if np.any(~np.isfinite(values)) or np.any(values < 0.0) or np.any(values > 1.0):
        raise DomainError("Curve parameter must lie in [0, 1].", details={"t": values})
    return values


def _bernstein(degree: int, t: np.ndarray) -> np.ndarray:
    t = np.atleast_1d(t)
    powers = np.arange(degree + 1)
    weights = np.array([comb(degree, i) for i in powers], dtype=float)
    return weights * t[:, None] ** powers * (1.0 - t[:, None]) ** (degree - powers)


@dataclass(frozen=True, eq=False)
class BezierCurve:
    control_points: np.ndarray

    def __post_init__(self) -> None:
        points = np.array(self.control_points, dtype=float)
        if points.ndim != 2 or points.shape[1] != 2 or points.shape[0] < 2:
            raise DomainError("A Bezier curve needs at least two 2-D control points.")
        if not np.all(np.isfinite(points)):
            raise DomainError("Bezier control points must be finite.")
        points.setflags(write=False)
        object.__setattr__(self, "control_points", points)

    @property
    def degree(self) -> int:
        return self.control_points.shape[0] - 1

    def evaluate(self, t: float | np.ndarray) -> np.ndarray:
        values = np.atleast_1d(np.asarray(t, dtype=float))
        points = _bernstein(self.degree, values) @ self.control_points
        # endpoints are interpolated exactly
        points[values == 0.0] = self.control_points[0]
        points[values == 1.0] = self.control_points[-1]
        return points

    def derivative(self, t: float | np.ndarray) -> np.ndarray:
        values = np.atleast_1d(np.asarray(t, dtype=float))
        hodograph = self.degree * np.diff(self.control_points, axis=0)
        return _bernstein(self.degree - 1, values) @ hodograph

    def reversed(self) -> "BezierCurve":
        return BezierCurve(self.control_points[::-1].copy())

    def split(self, t: float = 0.5) -> tuple["BezierCurve", "BezierCurve"]:
        """De Casteljau subdivision at parameter t."""
        levels = [self.control_points]
        while levels[-1].shape[0] > 1:
            current = levels[-1]
            levels.append((1.0 - t) * current[:-1] + t * current[1:])
        left = np.array([level[0] for level in levels])
        right = np.array([level[-1] for level in reversed(levels)])
        return BezierCurve(left), BezierCurve(right)


def bezier_eval(curve: BezierCurve, t: float) -> np.ndarray:
    return curve.evaluate(_as_parameter(t))[0]


def bezier_derivative(curve: BezierCurve, t: float) -> np.ndarray:
    return curve.derivative(_as_parameter(t))[0]


@dataclass(frozen=True, eq=False)
class Edge:
    start: np.ndarray
    end: np.ndarray
    vertex_ids: tuple[int, int]
    curve: BezierCurve | None = None

    @property
    def kind(self) -> str:
        return "straight" if self.curve is None else "curved"

    @property
    def is_curved(self) -> bool:
        return self.curve is not None

    @property
    def parametric_degree(self) -> int:
        return 1 if self.curve is None else self.curve.degree

    @property
    def key(self) -> tuple[int, int]:
        a, b = self.vertex_ids
        return (a, b) if a < b else (b, a)

    @property
    def is_canonical(self) -> bool:
        return self.vertex_ids[0] < self.vertex_ids[1]

    def point(self, t: float | np.ndarray) -> np.ndarray:
        values = np.atleast_1d(np.asarray(t, dtype=float))
        if self.curve is not None:
            return self.curve.evaluate(values)
        return self.start + values[:, None] * (self.end - self.start)

    def tangent(self, t: float | np.ndarray) -> np.ndarray:
        values = np.atleast_1d(np.asarray(t, dtype=float))
        if self.curve is not None:
            return self.curve.derivative(values)
        return np.tile(self.end - self.start, (values.size, 1))

    def reversed(self) -> "Edge":
        return Edge(
            start=self.end,
            end=self.start,
            vertex_ids=(self.vertex_ids[1], self.vertex_ids[0]),
            curve=None if self.curve is None else self.curve.reversed(),
        )

    def canonical(self) -> "Edge":
        return self if self.is_canonical else self.reversed()

    def sample(self, count: int) -> np.ndarray:
        return self.point(np.linspace(0.0, 1.0, count))

    def length(self) -> float:
        if self.curve is None:
            return float(np.linalg.norm(self.end - self.start))
        nodes, weights = leggauss(4 * self.parametric_degree + 16)
        t = 0.5 * (nodes + 1.0)
        speed = np.linalg.norm(self.tangent(t), axis=1)
        return float(0.5 * weights @ speed)


def _boundary_integral(edges: Sequence[Edge], integrand_degree: int, fn) -> float:
    total = 0.0
    for edge in edges:
        degree = integrand_degree * edge.parametric_degree + edge.parametric_degree - 1
        nodes, weights = leggauss(max(degree // 2 + 1, 1))
        t = 0.5 * (nodes + 1.0)
        points = edge.point(t)
        tangents = edge.tangent(t)
        total += float(0.5 * weights @ fn(points, tangents))
    return total


@dataclass(frozen=True, eq=False)
class Element:
    edges: tuple[Edge, ...]
    index: int = 0

    @cached_property
    def vertices(self) -> np.ndarray:
        return np.array([edge.start for edge in self.edges])

    @cached_property
    def vertex_ids(self) -> tuple[int, ...]:
        return tuple(edge.vertex_ids[0] for edge in self.edges)

    @property
    def n_vertices(self) -> int:
        return len(self.edges)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def is_curved(self) -> bool:
        return any(edge.is_curved for edge in self.edges)

    @cached_property
    def geometry(self) -> tuple[float, np.ndarray, float]:
        return element_geometry(self)

    @property
    def area(self) -> float:
        return self.geometry[0]

    @property
    def centroid(self) -> np.ndarray:
        return self.geometry[1]

    @property
    def diameter(self) -> float:
        return self.geometry[2]


def element_geometry(element: Element) -> tuple[float, np.ndarray, float]:
    """Area, centroid and diameter; area and centroid by the divergence theorem edge-wise."""
    edges = element.edges
    area = _boundary_integral(
        edges, 1, lambda p, d: 0.5 * (p[:, 0] * d[:, 1] - p[:, 1] * d[:, 0])
    )
    if not np.isfinite(area) or area <= 0.0:
        raise MeshValidationError(
            f"Element {element.index} has nonpositive area.",
            details={"element": element.index, "area": area},
        )
    cx = _boundary_integral(edges, 2, lambda p, d: 0.5 * p[:, 0] ** 2 * d[:, 1]) / area
    cy = _boundary_integral(edges, 2, lambda p, d: -0.5 * p[:, 1] ** 2 * d[:, 0]) / area

    samples = [element.vertices]
    for edge in edges:
        if edge.is_curved:
            samples.append(edge.sample(DIAMETER_CURVE_SAMPLES))
    points = np.vstack(samples)
    deltas = points[:, None, :] - points[None, :, :]
    diameter = float(np.sqrt((deltas**2).sum(axis=2)).max())
    return area, np.array([cx, cy]), diameter


@dataclass(frozen=True, eq=False)
class Mesh:
    name: str
    vertices: np.ndarray
    elements: tuple[Element, ...]
    warnings: tuple[str, ...] = field(default=())

    @property
    def n_vertices(self) -> int:
        return int(self.vertices.shape[0])

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    @cached_property
    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    @property
    def h(self) -> float:
        return max(element.diameter for element in self.elements)

    @property
    def total_area(self) -> float:
        return float(sum(element.area for element in self.elements))

    @cached_property
    def edge_incidence(self) -> dict[tuple[int, int], list[tuple[int, int]]]:
        incidence: dict[tuple[int, int], list[tuple[int, int]]] = {}
        for element in self.elements:
            for local, edge in enumerate(element.edges):
                incidence.setdefault(edge.key, []).append((element.index, local))
        return incidence

    @cached_property
    def edge_keys(self) -> tuple[tuple[int, int], ...]:
        return tuple(sorted(self.edge_incidence))

    @cached_property
    def edge_index(self) -> dict[tuple[int, int], int]:
        return {key: position for position, key in enumerate(self.edge_keys)}

    @cached_property
    def boundary_edges(self) -> frozenset[tuple[int, int]]:
        return frozenset(key for key, owners in self.edge_incidence.items() if len(owners) == 1)

    @cached_property
    def boundary_vertices(self) -> frozenset[int]:
        return frozenset(vertex for key in self.boundary_edges for vertex in key)

    def edge(self, key: tuple[int, int]) -> Edge:
        element_index, local = self.edge_incidence[key][0]
        return self.elements[element_index].edges[local].canonical()


EdgeSpec = tuple[int, int, "np.ndarray | None"]


def build_mesh(
    name: str,
    vertices: Sequence[Sequence[float]] | np.ndarray,
    elements: Sequence[Sequence[EdgeSpec]],
    *,
    warnings: Sequence[str] = (),
) -> Mesh:
    coords = np.array(vertices, dtype=float)
    coords.setflags(write=False)
    built: list[Element] = []
    for index, specs in enumerate(elements):
        edges = []
        for start, end, control_points in specs:
            curve = None if control_points is None else BezierCurve(np.asarray(control_points, dtype=float))
            edges.append(
                Edge(
                    start=coords[int(start)],
                    end=coords[int(end)],
                    vertex_ids=(int(start), int(end)),
                    curve=curve,
                )
            )
        built.append(Element(edges=tuple(edges), index=index))
    return Mesh(name=name, vertices=coords, elements=tuple(built), warnings=tuple(warnings))
