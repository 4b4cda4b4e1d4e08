"""Local and global degree-of-freedom layouts.

Local layout of one element, component-blocked:

    [comp 0: vertices, edge nodes] [comp 1: vertices, edge nodes] ... [internal]

Edge nodes are the k-1 interior Gauss-Lobatto points of each edge, in local
traversal order. Internal dofs are scaled moments (1/|E|) int v q_beta per component
up to ``internal_degree``; for Stokes they are the moments against an orthonormal
basis of the complement of gradients followed by the divergence moments against
the non-constant q_gamma of degree <= k-1.

Global numbering: for each component, all mesh vertices, then the nodes of every
canonical edge; element internals come last, element by element.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from vembench.errors import DomainError
from vembench.mesh.geometry import Edge, Element, Mesh
from vembench.polynomials import dim_p
from vembench.projectors.formulations import Formulation, SpaceKind, parse_formulation
from vembench.projectors.problems import ProblemKind, get_problem
from vembench.quadrature import gauss_lobatto


def edge_parameters(k: int) -> np.ndarray:
    """Interior Gauss-Lobatto nodes mapped to (0, 1), ascending."""
    if k < 2:
        return np.zeros(0)
    rule = gauss_lobatto(k + 1)
    return 0.5 * (np.asarray(rule.points[1:-1]) + 1.0)


def edge_node_points(edge: Edge, k: int) -> np.ndarray:
    """Edge nodes in local traversal order, always generated from the canonical edge."""
    t = edge_parameters(k)
    if t.size == 0:
        return np.zeros((0, 2))
    if edge.is_canonical:
        return edge.point(t)
    return edge.canonical().point(t)[::-1]


def stokes_perp_count(degree: int) -> int:
    if degree < 0:
        return 0
    return 2 * dim_p(degree) - (dim_p(degree + 1) - 1)


@dataclass(frozen=True, eq=False)
class LocalSpace:
    element: Element
    problem: ProblemKind
    k: int
    ell: int = 0
    kind: SpaceKind = SpaceKind.STANDARD

    def __post_init__(self) -> None:
        if self.k < self.problem.min_degree:
            raise DomainError(
                f"k={self.k} is below the minimum degree {self.problem.min_degree} for {self.problem.name}.",
                details={"k": self.k, "problem": self.problem.name},
            )
        if self.ell < 0:
            raise DomainError("The augmentation order must be nonnegative.", details={"ell": self.ell})
        if self.kind is not SpaceKind.STANDARD and self.ell < 1:
            raise DomainError(f"A {self.kind} space needs ell >= 1.", details={"ell": self.ell})

    @property
    def ncomp(self) -> int:
        return self.problem.ncomp

    @property
    def n_vertices(self) -> int:
        return self.element.n_vertices

    @property
    def nodes_per_edge(self) -> int:
        return self.k - 1

    @property
    def internal_degree(self) -> int:
        if self.kind is SpaceKind.AUGMENTED:
            return self.k + self.ell - 2
        return self.k - 2

    @property
    def max_moment_degree(self) -> int:
        """Highest degree d for which int v q_beta is computable for |beta| = d."""
        if self.kind is SpaceKind.ENLARGED:
            return self.k + self.ell
        return max(self.k, self.internal_degree)

    @property
    def n_boundary_per_comp(self) -> int:
        return self.n_vertices + self.element.n_edges * self.nodes_per_edge

    @property
    def n_boundary(self) -> int:
        return self.ncomp * self.n_boundary_per_comp

    @property
    def n_perp(self) -> int:
        return stokes_perp_count(self.internal_degree) if self.problem.is_stokes else 0

    @property
    def n_div(self) -> int:
        return dim_p(self.k - 1) - 1 if self.problem.is_stokes else 0

    @property
    def n_moments_per_comp(self) -> int:
        return 0 if self.problem.is_stokes else dim_p(self.internal_degree)

    @property
    def n_internal(self) -> int:
        if self.problem.is_stokes:
            return self.n_perp + self.n_div
        return self.ncomp * self.n_moments_per_comp

    @property
    def n_dofs(self) -> int:
        return self.n_boundary + self.n_internal

    def vertex_dof(self, comp: int, vertex: int) -> int:
        return comp * self.n_boundary_per_comp + vertex % self.n_vertices

    def edge_dof(self, comp: int, edge: int, node: int) -> int:
        return comp * self.n_boundary_per_comp + self.n_vertices + edge * self.nodes_per_edge + node

    def moment_dof(self, comp: int, index: int) -> int:
        return self.n_boundary + comp * self.n_moments_per_comp + index

    def perp_dof(self, index: int) -> int:
        return self.n_boundary + index

    def div_dof(self, gamma: int) -> int:
        """Dof of the divergence moment against q_gamma, gamma >= 1."""
        return self.n_boundary + self.n_perp + gamma - 1

    def edge_trace_dofs(self, comp: int, edge: int) -> np.ndarray:
        """Dofs carrying the trace on ``edge``: start vertex, interior nodes, end vertex."""
        interior = [self.edge_dof(comp, edge, node) for node in range(self.nodes_per_edge)]
        return np.array([self.vertex_dof(comp, edge), *interior, self.vertex_dof(comp, edge + 1)], dtype=int)

    @cached_property
    def trace_parameters(self) -> np.ndarray:
        return np.concatenate(([0.0], edge_parameters(self.k), [1.0]))

    @cached_property
    def node_points(self) -> np.ndarray:
        """Coordinates of the per-component boundary dofs, in local order."""
        points = [self.element.vertices]
        points.extend(edge_node_points(edge, self.k) for edge in self.element.edges)
        return np.vstack(points)

    @property
    def boundary_dofs(self) -> np.ndarray:
        return np.arange(self.n_boundary)

    def vertex_dofs(self, comp: int) -> np.ndarray:
        return comp * self.n_boundary_per_comp + np.arange(self.n_vertices)


def local_space(element: Element, problem: ProblemKind, formulation: Formulation, k: int, ell: int = 0) -> LocalSpace:
    kind = formulation.space_kind(problem)
    return LocalSpace(element=element, problem=problem, k=k, ell=ell if formulation.is_self_stabilized else 0, kind=kind)


@dataclass(frozen=True, eq=False)
class GlobalDofMap:
    mesh: Mesh
    problem: ProblemKind
    k: int
    spaces: tuple[LocalSpace, ...]

    @property
    def nodes_per_edge(self) -> int:
        return self.k - 1

    @property
    def n_boundary_per_comp(self) -> int:
        return self.mesh.n_vertices + len(self.mesh.edge_keys) * self.nodes_per_edge

    @cached_property
    def internal_offsets(self) -> np.ndarray:
        sizes = [space.n_internal for space in self.spaces]
        start = self.problem.ncomp * self.n_boundary_per_comp
        return start + np.concatenate(([0], np.cumsum(sizes)))

    @property
    def n_dofs(self) -> int:
        return int(self.internal_offsets[-1])

    def _edge_node_global(self, comp: int, edge: Edge, node: int) -> int:
        position = self.mesh.edge_index[edge.key]
        canonical_node = node if edge.is_canonical else self.nodes_per_edge - 1 - node
        return (
            comp * self.n_boundary_per_comp
            + self.mesh.n_vertices
            + position * self.nodes_per_edge
            + canonical_node
        )

    @cached_property
    def local_to_global(self) -> tuple[np.ndarray, ...]:
        maps = []
        for space in self.spaces:
            element = space.element
            mapping = np.empty(space.n_dofs, dtype=int)
            for comp in range(space.ncomp):
                for vertex, vertex_id in enumerate(element.vertex_ids):
                    mapping[space.vertex_dof(comp, vertex)] = comp * self.n_boundary_per_comp + vertex_id
                for index, edge in enumerate(element.edges):
                    for node in range(space.nodes_per_edge):
                        mapping[space.edge_dof(comp, index, node)] = self._edge_node_global(comp, edge, node)
            offset = self.internal_offsets[element.index]
            mapping[space.n_boundary:] = offset + np.arange(space.n_internal)
            maps.append(mapping)
        return tuple(maps)

    @cached_property
    def boundary_node_points(self) -> np.ndarray:
        """Coordinates of the scalar boundary numbering (vertices, then edge nodes)."""
        points = [np.asarray(self.mesh.vertices)]
        for key in self.mesh.edge_keys:
            points.append(edge_node_points(self.mesh.edge(key), self.k))
        return np.vstack(points)

    @cached_property
    def dirichlet_nodes(self) -> np.ndarray:
        """Scalar boundary-numbering indices lying on the domain boundary."""
        nodes = sorted(self.mesh.boundary_vertices)
        for key in sorted(self.mesh.boundary_edges):
            start = self.mesh.n_vertices + self.mesh.edge_index[key] * self.nodes_per_edge
            nodes.extend(range(start, start + self.nodes_per_edge))
        return np.array(nodes, dtype=int)

    @cached_property
    def dirichlet_dofs(self) -> np.ndarray:
        return np.concatenate(
            [comp * self.n_boundary_per_comp + self.dirichlet_nodes for comp in range(self.problem.ncomp)]
        )

    def dirichlet_values(self, exact) -> np.ndarray:
        """Nodal values of ``exact(points) -> (n, ncomp)`` at the Dirichlet dofs."""
        values = np.atleast_2d(exact(self.boundary_node_points[self.dirichlet_nodes]))
        values = values.reshape(self.dirichlet_nodes.size, self.problem.ncomp)
        return np.concatenate([values[:, comp] for comp in range(self.problem.ncomp)])

    def interpolate_boundary(self, exact) -> np.ndarray:
        """Boundary-numbering nodal values of ``exact`` for every component."""
        values = np.atleast_2d(exact(self.boundary_node_points)).reshape(-1, self.problem.ncomp)
        return np.concatenate([values[:, comp] for comp in range(self.problem.ncomp)])


def build_dofmap(
    mesh: Mesh,
    problem: str | ProblemKind,
    formulation: str | Formulation,
    k: int,
    ell: int | list[int] | tuple[int, ...] = 0,
) -> GlobalDofMap:
    problem_kind = get_problem(problem)
    parsed = parse_formulation(formulation, problem_kind)
    ells = [ell] * mesh.n_elements if isinstance(ell, int) else list(ell)
    if len(ells) != mesh.n_elements:
        raise DomainError("One augmentation order per element is required.", details={"given": len(ells)})
    if parsed.is_self_stabilized and min(ells, default=1) < 1:
        raise DomainError("Self-stabilized formulations need ell >= 1.", details={"ell": min(ells)})
    spaces = tuple(
        local_space(element, problem_kind, parsed, k, element_ell)
        for element, element_ell in zip(mesh.elements, ells)
    )
    return GlobalDofMap(mesh=mesh, problem=problem_kind, k=k, spaces=spaces)


def dofmap_from_spaces(mesh: Mesh, problem: ProblemKind, k: int, spaces: list[LocalSpace]) -> GlobalDofMap:
    return GlobalDofMap(mesh=mesh, problem=problem, k=k, spaces=tuple(spaces))
