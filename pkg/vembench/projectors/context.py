from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.interpolate import BarycentricInterpolator
from scipy.linalg import null_space

from vembench.mesh.geometry import Element
from vembench.polynomials import DEFAULT_REORTH_DEGREE, DIV, GRAD, OrthoBasis, dim_p, mgs_orthonormalize
from vembench.projectors.dofmap import LocalSpace
from vembench.quadrature import EdgeQuadrature, QuadRule, edge_parametric_rule, element_rule


@dataclass(frozen=True)
class QuadraturePolicy:
    surplus: int = 2
    vc_surplus: int = 8
    error_surplus: int = 8
    reorth_degree: int = DEFAULT_REORTH_DEGREE

    @classmethod
    def from_config(cls, config) -> "QuadraturePolicy":
        return cls(
            surplus=int(config.QUAD_SURPLUS),
            vc_surplus=int(config.VC_QUAD_SURPLUS),
            error_surplus=int(config.ERROR_QUAD_SURPLUS),
            reorth_degree=int(config.MGS_REORTH_DEGREE),
        )


class ElementContext:
    """Per-element caches: orthonormal basis, quadrature rules, Stokes complement bases."""

    def __init__(self, element: Element, policy: QuadraturePolicy | None = None) -> None:
        self.element = element
        self.policy = policy or QuadraturePolicy()
        self._basis: OrthoBasis | None = None
        self._rules: dict[int, QuadRule] = {}
        self._perp: dict[int, np.ndarray] = {}

    @property
    def area(self) -> float:
        return self.element.area

    def basis(self, degree: int) -> OrthoBasis:
        if self._basis is None or self._basis.degree < degree:
            self._basis = mgs_orthonormalize(self.element, degree, reorth_degree=self.policy.reorth_degree)
            # cached complement bases refer to the previous R
            self._perp.clear()
        return self._basis

    def rule(self, exactness: int) -> QuadRule:
        exactness = max(int(exactness), 0)
        if exactness not in self._rules:
            self._rules[exactness] = element_rule(self.element, exactness)
        return self._rules[exactness]

    def gradient_block(self, degree: int) -> np.ndarray:
        """Gradients of the non-constant q_gamma of degree <= degree+1, in [P_degree]^2 coordinates."""
        basis = self.basis(degree + 1)
        full = basis.operator_matrix(GRAD, degree + 1)
        size, large = dim_p(degree), dim_p(degree + 1)
        rows = np.concatenate((np.arange(size), large + np.arange(size)))
        return full[rows][:, 1:]

    def perp_basis(self, degree: int) -> np.ndarray:
        """Orthonormal coefficients of the L2 complement of gradients inside [P_degree]^2."""
        if degree < 0:
            return np.zeros((0, 0))
        if degree not in self._perp:
            self._perp[degree] = null_space(self.gradient_block(degree).T)
        return self._perp[degree]

    def divergence_block(self, degree: int) -> np.ndarray:
        """div of [P_degree]^2 coefficients, as q_gamma coefficients of degree <= degree-1."""
        basis = self.basis(degree)
        full = basis.operator_matrix(DIV, degree)
        return full[: dim_p(degree - 1)]


def trace_lagrange(space: LocalSpace, rule: EdgeQuadrature) -> np.ndarray:
    """Values of the edge Lagrange basis (vertex, nodes, vertex) at the rule points."""
    nodes = space.trace_parameters
    return BarycentricInterpolator(nodes, np.eye(nodes.size))(rule.t)


def trace_pairing(
    space: LocalSpace,
    integrand: Callable[[EdgeQuadrature], np.ndarray],
    field_degree: int,
    *,
    extra_exactness: int = 0,
) -> np.ndarray:
    """Boundary integrals of the dof basis against ``integrand``.

    ``integrand(rule)`` returns (n_points, ncomp, m) with the rule weights already
    applied; the result has shape (n_dofs, m).
    """
    out: np.ndarray | None = None
    for index, edge in enumerate(space.element.edges):
        degree = edge.parametric_degree
        exactness = space.k + degree * field_degree + degree - 1 + extra_exactness
        rule = edge_parametric_rule(edge, exactness)
        lagrange = trace_lagrange(space, rule)
        values = integrand(rule)
        if out is None:
            out = np.zeros((space.n_dofs, values.shape[2]))
        contribution = np.einsum("qa,qcm->acm", lagrange, values)
        for comp in range(space.ncomp):
            np.add.at(out, space.edge_trace_dofs(comp, index), contribution[:, comp, :])
    assert out is not None
    return out


def edge_mass_matrix(space: LocalSpace) -> np.ndarray:
    """int over the boundary of phi_i phi_j (arc length), per component."""
    matrix = np.zeros((space.n_dofs, space.n_dofs))
    for index, edge in enumerate(space.element.edges):
        degree = edge.parametric_degree
        rule = edge_parametric_rule(edge, 2 * space.k + 2 * degree)
        lagrange = trace_lagrange(space, rule)
        local = lagrange.T @ (rule.arc_weights[:, None] * lagrange)
        for comp in range(space.ncomp):
            dofs = space.edge_trace_dofs(comp, index)
            matrix[np.ix_(dofs, dofs)] += local
    return matrix


def polynomial_dofs(space: LocalSpace, context: ElementContext, degree: int) -> np.ndarray:
    """D[i, a] = dof_i(q_a) for the component-blocked basis of [P_degree]^ncomp."""
    ncomp = space.ncomp
    size = dim_p(degree)
    basis = context.basis(max(degree, 0))
    values = basis.evaluate(space.node_points, degree)
    area = context.area
    matrix = np.zeros((space.n_dofs, ncomp * size))
    per_comp = space.n_boundary_per_comp
    for comp in range(ncomp):
        matrix[comp * per_comp:(comp + 1) * per_comp, comp * size:(comp + 1) * size] = values

    if space.problem.is_stokes:
        perp_degree = space.internal_degree
        if space.n_perp:
            perp = context.perp_basis(perp_degree)
            small = dim_p(perp_degree)
            keep = min(small, size)
            for comp in range(2):
                block = perp[comp * small:comp * small + keep]
                matrix[space.n_boundary:space.n_boundary + space.n_perp, comp * size:comp * size + keep] = block.T / area
        if space.n_div:
            divergence = context.divergence_block(degree)
            rows = min(divergence.shape[0], space.n_div + 1)
            for gamma in range(1, rows):
                matrix[space.div_dof(gamma)] = divergence[gamma] / area
        return matrix

    keep = min(space.n_moments_per_comp, size)
    for comp in range(ncomp):
        for beta in range(keep):
            matrix[space.moment_dof(comp, beta), comp * size + beta] = 1.0 / area
    return matrix


def kernel_functionals(space: LocalSpace, context: ElementContext) -> np.ndarray:
    """Vertex-averaged pairings with the kernel basis, shape (kernel_dim, n_dofs)."""
    element = space.element
    values = space.problem.kernel_functions(element.vertices, element.centroid, element.diameter)
    functionals = np.zeros((space.problem.kernel_dim, space.n_dofs))
    for comp in range(space.ncomp):
        functionals[:, space.vertex_dofs(comp)] = values[:, comp, :].T / space.n_vertices
    return functionals
