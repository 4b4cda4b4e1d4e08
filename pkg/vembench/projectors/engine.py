"""Generic projection onto polynomial fields.

A target space is a sum of blocks ``operator(q)`` over the orthonormal basis
functions q with degree in [low, high]. The projection of the strain D(phi) of a
dof basis function phi is the field Pi* in the target with

    (W Pi*, w) = (W D phi, w)    for every target field w,

and the right-hand side is integrated by parts,

    (D phi, W w) = -(phi, D'(W w)) + <phi, flux(n) W w>,

with the volume term taken from moments and the boundary term from the edge
traces. Blocks containing the kernel of D are closed by the vertex-averaged
condition K^T c = f on the kernel basis, added as s K K^T to the matrix and
s K f to the right-hand side. G and B vanish on the kernel directions, so the
condition holds exactly and the coefficients equal those of the bordered
system, while the matrix stays square and symmetric.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from vembench.coefficients import Coefficient
from vembench.errors import DegenerateElementError
from vembench.polynomials import (
    DifferentialOperator,
    dim_p,
    evaluate_vector,
    evaluate_vector_derivative,
    exponents,
    pad_coefficients,
)
from vembench.projectors.context import ElementContext, kernel_functionals, polynomial_dofs, trace_pairing
from vembench.projectors.dofmap import LocalSpace
from vembench.projectors.moments import MomentProvider


@dataclass(frozen=True, eq=False)
class Weight:
    """Pairing weight: a constant matrix, or a coefficient evaluated at quadrature points."""

    size: int
    matrix: np.ndarray | None = None
    coefficient: Coefficient | None = None
    scale: float = 1.0

    @classmethod
    def identity(cls, size: int) -> "Weight":
        return cls(size=size, matrix=np.eye(size))

    @classmethod
    def constant(cls, matrix: np.ndarray, scale: float = 1.0) -> "Weight":
        matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
        return cls(size=matrix.shape[0], matrix=matrix, scale=scale)

    @classmethod
    def variable(cls, coefficient: Coefficient, scale: float = 1.0) -> "Weight":
        return cls(size=coefficient.size, coefficient=coefficient, scale=scale)

    @property
    def is_variable(self) -> bool:
        return self.coefficient is not None

    def values(self, points: np.ndarray) -> np.ndarray:
        if self.coefficient is not None:
            return self.scale * self.coefficient.value(points)
        assert self.matrix is not None
        return np.broadcast_to(self.scale * self.matrix, (len(points), self.size, self.size))

    def derivative(self, points: np.ndarray, axis: int) -> np.ndarray:
        if self.coefficient is None:
            return np.zeros((len(points), self.size, self.size))
        values = self.coefficient.dx(points) if axis == 0 else self.coefficient.dy(points)
        return self.scale * values

    def kron(self, size: int) -> np.ndarray:
        assert self.matrix is not None
        return np.kron(self.scale * self.matrix, np.eye(size))


@dataclass(frozen=True)
class TargetBlock:
    operator: DifferentialOperator
    low: int
    high: int
    kernel: bool = False

    @property
    def field_degree(self) -> int:
        return max(self.high - self.operator.order, 0)

    def generators(self) -> np.ndarray:
        """Unit coefficient vectors of the basis functions with degree in [low, high]."""
        size = dim_p(self.high)
        degrees = exponents(self.high).sum(axis=1)
        selected = np.flatnonzero((degrees >= self.low) & (degrees <= self.high))
        columns = [comp * size + index for comp in range(self.operator.ncomp_in) for index in selected]
        matrix = np.zeros((self.operator.ncomp_in * size, len(columns)))
        matrix[columns, np.arange(len(columns))] = 1.0
        return matrix


@dataclass(frozen=True, eq=False)
class ProjectorSet:
    """Dense matrices of one projector on one element.

    ``coefficients`` (Pi*) solves ``G @ Pi* = B``; ``fields @ Pi*`` are the projected
    fields in the orthonormal basis of degree ``field_degree``. For a single polynomial
    block, ``polynomials`` holds Pi phi itself and ``dof_projector`` its dof vector.
    """

    tag: str
    degree: int
    field_degree: int
    field_ncomp: int
    fields: np.ndarray
    G: np.ndarray
    B: np.ndarray
    coefficients: np.ndarray
    D: np.ndarray
    polynomials: np.ndarray | None = None
    dof_projector: np.ndarray | None = None
    blocks: tuple[TargetBlock, ...] = field(default=())

    @property
    def field_coefficients(self) -> np.ndarray:
        return self.fields @ self.coefficients


def _field_matrix(context: ElementContext, blocks: tuple[TargetBlock, ...], field_ncomp: int) -> tuple[np.ndarray, int]:
    field_degree = max(block.field_degree for block in blocks)
    columns = []
    for block in blocks:
        basis = context.basis(block.high)
        image = basis.operator_matrix(block.operator, block.high) @ block.generators()
        columns.append(pad_coefficients(image, field_ncomp, block.high, field_degree))
    return np.hstack(columns), field_degree


def pairing_matrix(
    context: ElementContext,
    left: np.ndarray,
    right: np.ndarray,
    ncomp: int,
    degree: int,
    weight: Weight,
) -> np.ndarray:
    """(W u_a, v_b) for component-blocked polynomial fields of the given degree."""
    if not weight.is_variable:
        return left.T @ weight.kron(dim_p(degree)) @ right
    rule = context.rule(2 * degree + context.policy.vc_surplus)
    basis = context.basis(degree)
    u = evaluate_vector(basis, rule.points, left, ncomp, degree)
    v = evaluate_vector(basis, rule.points, right, ncomp, degree)
    return np.einsum("q,qfa,qfg,qgb->ab", rule.weights, u, weight.values(rule.points), v, optimize=True)


def _volume_constant(
    context: ElementContext,
    strain: DifferentialOperator,
    fields: np.ndarray,
    field_degree: int,
    weight: Weight,
    degree: int,
) -> np.ndarray:
    """D'(W w_j) in the orthonormal basis, truncated to ``degree``."""
    if degree < 0:
        return np.zeros((0, fields.shape[1]))
    basis = context.basis(field_degree)
    weighted = weight.kron(dim_p(field_degree)) @ fields
    divergence = basis.operator_matrix(strain.transpose(), field_degree) @ weighted
    return pad_coefficients(divergence, strain.ncomp_in, field_degree, degree)


def _volume_variable(
    context: ElementContext,
    strain: DifferentialOperator,
    fields: np.ndarray,
    field_degree: int,
    weight: Weight,
    moment_degree: int,
) -> np.ndarray:
    """int q_beta D'(W w_j) by quadrature, against q_beta of degree <= moment_degree."""
    ncomp_f = strain.ncomp_out
    rule = context.rule(2 * max(field_degree, moment_degree) + context.policy.vc_surplus)
    basis = context.basis(max(field_degree, moment_degree))
    points = rule.points
    values = evaluate_vector(basis, points, fields, ncomp_f, field_degree)
    w = weight.values(points)
    result = None
    for axis, key in enumerate(((1, 0), (0, 1))):
        derivative = evaluate_vector_derivative(basis, points, fields, ncomp_f, field_degree, *key)
        flux = np.einsum("qfg,qgn->qfn", weight.derivative(points, axis), values) + np.einsum(
            "qfg,qgn->qfn", w, derivative
        )
        term = np.einsum("fc,qfn->qcn", strain.matrix_for(*key), flux)
        result = term if result is None else result + term
    assert result is not None
    test = basis.evaluate(points, moment_degree) * rule.weights[:, None]
    volume = np.einsum("qb,qcn->cbn", test, result).reshape(strain.ncomp_in * dim_p(moment_degree), -1)
    return volume


def volume_degree(space: LocalSpace, blocks: tuple[TargetBlock, ...], weight: Weight) -> int:
    """Degree of the moments the volume term is paired with.

    With a constant weight D'(W w) has one degree less than w and vanishes on a
    divergence-free perp block; a variable weight is paired with Pi0 of degree
    up to that of w, capped by the space.
    """
    problem = space.problem
    if weight.is_variable:
        degree = max(block.field_degree for block in blocks) + 1
    else:
        degree = -1
        for block in blocks:
            if block.operator is problem.perp and problem.perp_is_divergence_free:
                continue
            degree = max(degree, block.field_degree - 1)
    return min(degree, space.max_moment_degree)


def _boundary(
    space: LocalSpace,
    context: ElementContext,
    strain: DifferentialOperator,
    fields: np.ndarray,
    field_degree: int,
    weight: Weight,
) -> np.ndarray:
    basis = context.basis(max(field_degree, 0))
    ncomp_f = strain.ncomp_out

    def integrand(rule):
        flux = strain.flux(rule.normal_weights)
        values = evaluate_vector(basis, rule.points, fields, ncomp_f, field_degree)
        return np.einsum("qcf,qfg,qgn->qcn", flux, weight.values(rule.points), values, optimize=True)

    extra = context.policy.vc_surplus if weight.is_variable else 0
    return trace_pairing(space, integrand, field_degree, extra_exactness=extra).T


def project(
    space: LocalSpace,
    context: ElementContext,
    blocks: tuple[TargetBlock, ...] | list[TargetBlock],
    weight: Weight,
    moments: MomentProvider,
    *,
    tag: str,
    self_enhanced: bool = False,
) -> ProjectorSet:
    """Project the strain of every local basis function onto the target blocks.

    With ``self_enhanced`` the moments of degree k-1 and k are those of the
    projection being computed (the coefficient-aware enhancement), which turns the
    volume term into an unknown-dependent coupling.
    """
    blocks = tuple(blocks)
    problem = space.problem
    strain = problem.strain
    field_ncomp = strain.ncomp_out
    top = max(block.high for block in blocks)
    context.basis(top)

    fields, field_degree = _field_matrix(context, blocks, field_ncomp)
    G = pairing_matrix(context, fields, fields, field_ncomp, field_degree, weight)
    G = 0.5 * (G + G.T)

    degree = volume_degree(space, blocks, weight)
    if weight.is_variable:
        volume = _volume_variable(context, strain, fields, field_degree, weight, degree)
    else:
        volume = _volume_constant(context, strain, fields, field_degree, weight, degree)

    coupling = None
    if self_enhanced:
        if len(blocks) != 1 or not blocks[0].kernel or degree != blocks[0].high:
            raise DegenerateElementError("Self-enhanced projection needs one kernel block of the moment degree.")
        known, mask = moments.known(degree)
        B = -volume.T @ known
        coupling = volume[mask].T @ blocks[0].generators()[mask]
    else:
        B = -volume.T @ moments.matrix(degree)
    B = B + _boundary(space, context, strain, fields, field_degree, weight)

    system = G if coupling is None else G + coupling
    rhs = B
    kernel_blocks = [index for index, block in enumerate(blocks) if block.kernel]
    offsets = np.cumsum([0] + [block.generators().shape[1] for block in blocks])
    if kernel_blocks:
        functionals = kernel_functionals(space, context)
        K = np.zeros((fields.shape[1], problem.kernel_dim))
        for index in kernel_blocks:
            block = blocks[index]
            dofs = polynomial_dofs(space, context, block.high) @ block.generators()
            K[offsets[index]:offsets[index + 1]] = (functionals @ dofs).T
        scale = max(float(np.trace(G)) / max(G.shape[0], 1), np.finfo(float).tiny)
        system = system + scale * K @ K.T
        rhs = rhs + scale * K @ functionals

    try:
        if coupling is None:
            coefficients = linalg.solve(system, rhs, assume_a="sym")
        else:
            coefficients = linalg.solve(system, rhs)
    except (linalg.LinAlgError, ValueError) as exc:
        raise DegenerateElementError(
            f"Projection system is singular on element {space.element.index}.",
            details={"element": space.element.index, "tag": tag, "reason": str(exc)},
        ) from exc
    if not np.all(np.isfinite(coefficients)):
        raise DegenerateElementError(
            f"Projection produced non-finite coefficients on element {space.element.index}.",
            details={"element": space.element.index, "tag": tag},
        )

    k_dofs = polynomial_dofs(space, context, space.k)
    polynomials = None
    dof_projector = None
    if len(blocks) == 1 and blocks[0].operator is strain:
        polynomials = blocks[0].generators() @ coefficients
        dof_projector = polynomial_dofs(space, context, blocks[0].high) @ polynomials
    return ProjectorSet(
        tag=tag,
        degree=top,
        field_degree=field_degree,
        field_ncomp=field_ncomp,
        fields=fields,
        G=G,
        B=B,
        coefficients=coefficients,
        D=k_dofs,
        polynomials=polynomials,
        dof_projector=dof_projector,
        blocks=blocks,
    )
