"""Gauss rules on edges and elements.

Edge rules work in the edge parameter t in [0, 1]; the requested exactness applies
to the parametric integrand. Element rules fan-triangulate from the centroid and
map each (possibly curved) triangle with c + s * (gamma(t) - c).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import Legendre, leggauss

from vembench.errors import DegenerateElementError, DomainError
from vembench.mesh.geometry import Edge, Element

LOBATTO_NEWTON_ITERATIONS = 50


@dataclass(frozen=True, eq=False)
class QuadRule:
    points: np.ndarray
    weights: np.ndarray
    exactness: int

    @property
    def size(self) -> int:
        return int(self.weights.size)

    def integrate(self, values: np.ndarray) -> np.ndarray:
        return np.tensordot(self.weights, values, axes=(0, 0))


@dataclass(frozen=True, eq=False)
class EdgeQuadrature:
    """Gauss rule in the edge parameter; weights exclude any Jacobian."""

    t: np.ndarray
    points: np.ndarray
    weights: np.ndarray
    tangents: np.ndarray
    exactness: int

    @property
    def arc_weights(self) -> np.ndarray:
        return self.weights * np.linalg.norm(self.tangents, axis=1)

    @property
    def normal_weights(self) -> np.ndarray:
        """Outward normal times |gamma'| times weight, shape (n, 2)."""
        return self.weights[:, None] * np.column_stack((self.tangents[:, 1], -self.tangents[:, 0]))


def points_for_exactness(exactness: int) -> int:
    return max(int(exactness) // 2 + 1, 1)


@lru_cache(maxsize=128)
def _gauss_legendre_cached(n: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = leggauss(n)
    nodes = 0.5 * (nodes - nodes[::-1])
    weights = 0.5 * (weights + weights[::-1])
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gauss_legendre(n: int) -> QuadRule:
    if n < 1:
        raise DomainError("Gauss-Legendre needs at least one point.", details={"n": n})
    nodes, weights = _gauss_legendre_cached(int(n))
    return QuadRule(points=nodes, weights=weights, exactness=2 * n - 1)


@lru_cache(maxsize=128)
def _gauss_lobatto_cached(n: int) -> tuple[np.ndarray, np.ndarray]:
    basis = Legendre.basis(n - 1)
    derivative = basis.deriv()
    # Chebyshev-Gauss-Lobatto start, Newton on P'_{n-1}
    x = -np.cos(np.pi * np.arange(n) / (n - 1))
    interior = x[1:-1].copy()
    second = derivative.deriv()
    for _ in range(LOBATTO_NEWTON_ITERATIONS):
        if interior.size == 0:
            break
        step = derivative(interior) / second(interior)
        interior -= step
        if np.max(np.abs(step)) < 1e-16:
            break
    nodes = np.concatenate(([-1.0], np.sort(interior), [1.0]))
    nodes = 0.5 * (nodes - nodes[::-1])
    weights = 2.0 / (n * (n - 1) * basis(nodes) ** 2)
    weights = 0.5 * (weights + weights[::-1])
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gauss_lobatto(n: int) -> QuadRule:
    if n < 2:
        raise DomainError("Gauss-Lobatto needs at least two points.", details={"n": n})
    nodes, weights = _gauss_lobatto_cached(int(n))
    return QuadRule(points=nodes, weights=weights, exactness=2 * n - 3)


def unit_interval_rule(exactness: int) -> tuple[np.ndarray, np.ndarray]:
    rule = gauss_legendre(points_for_exactness(exactness))
    return 0.5 * (rule.points + 1.0), 0.5 * rule.weights


def edge_parametric_rule(edge: Edge, exactness: int) -> EdgeQuadrature:
    if exactness < 0:
        raise DomainError("Quadrature exactness must be nonnegative.", details={"exactness": exactness})
    t, weights = unit_interval_rule(exactness)
    return EdgeQuadrature(
        t=t,
        points=edge.point(t),
        weights=weights,
        tangents=edge.tangent(t),
        exactness=int(exactness),
    )


def edge_rule(edge: Edge, exactness: int) -> QuadRule:
    rule = edge_parametric_rule(edge, exactness)
    return QuadRule(points=rule.points, weights=rule.arc_weights, exactness=rule.exactness)


def _fan_piece(
    apex: np.ndarray,
    edge_points: np.ndarray,
    edge_tangents: np.ndarray,
    s: np.ndarray,
    s_weights: np.ndarray,
    t_weights: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    radial = edge_points - apex
    cross = radial[:, 0] * edge_tangents[:, 1] - radial[:, 1] * edge_tangents[:, 0]
    points = apex + s[:, None, None] * radial[None, :, :]
    weights = (s * s_weights)[:, None] * (cross * t_weights)[None, :]
    return points.reshape(-1, 2), weights.reshape(-1)


def _ear_clip(vertices: np.ndarray) -> list[tuple[int, int, int]]:
    remaining = list(range(len(vertices)))
    triangles: list[tuple[int, int, int]] = []
    scale = float(np.ptp(vertices, axis=0).max()) ** 2

    def cross(a: int, b: int, c: int) -> float:
        ab = vertices[b] - vertices[a]
        ac = vertices[c] - vertices[a]
        return float(ab[0] * ac[1] - ab[1] * ac[0])

    def inside(p: int, a: int, b: int, c: int) -> bool:
        return cross(a, b, p) >= 0 and cross(b, c, p) >= 0 and cross(c, a, p) >= 0

    while len(remaining) > 3:
        count = len(remaining)
        clipped = False
        for position in range(count):
            a = remaining[position - 1]
            b = remaining[position]
            c = remaining[(position + 1) % count]
            area = cross(a, b, c)
            if abs(area) <= 1e-14 * scale:
                # collinear vertex, drop it without a triangle
                remaining.pop(position)
                clipped = True
                break
            if area < 0:
                continue
            others = [p for p in remaining if p not in (a, b, c)]
            if any(inside(p, a, b, c) for p in others):
                continue
            triangles.append((a, b, c))
            remaining.pop(position)
            clipped = True
            break
        if not clipped:
            raise DegenerateElementError("Ear clipping failed; polygon is not simple.")
    triangles.append((remaining[0], remaining[1], remaining[2]))
    return triangles


def element_rule(element: Element, exactness: int) -> QuadRule:
    if exactness < 0:
        raise DomainError("Quadrature exactness must be nonnegative.", details={"exactness": exactness})
    centroid = element.centroid
    s, s_weights = unit_interval_rule(exactness + 1)

    pieces: list[tuple[np.ndarray, np.ndarray]] = []
    star_shaped = True
    for edge in element.edges:
        degree = edge.parametric_degree
        t, t_weights = unit_interval_rule(exactness * degree + 2 * degree - 1)
        points = edge.point(t)
        tangents = edge.tangent(t)
        piece = _fan_piece(centroid, points, tangents, s, s_weights, t_weights)
        if not edge.is_curved:
            radial = edge.start - centroid
            direction = edge.end - edge.start
            if radial[0] * direction[1] - radial[1] * direction[0] <= 0.0:
                star_shaped = False
        pieces.append(piece)

    if not star_shaped and not element.is_curved:
        pieces = []
        vertices = element.vertices
        t, t_weights = unit_interval_rule(exactness + 1)
        for a, b, c in _ear_clip(vertices):
            edge_points = vertices[b] + t[:, None] * (vertices[c] - vertices[b])
            tangents = np.tile(vertices[c] - vertices[b], (t.size, 1))
            pieces.append(_fan_piece(vertices[a], edge_points, tangents, s, s_weights, t_weights))

    points = np.vstack([piece[0] for piece in pieces])
    weights = np.concatenate([piece[1] for piece in pieces])
    return QuadRule(points=points, weights=weights, exactness=int(exactness))
