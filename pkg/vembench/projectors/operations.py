"""Named projector operations and the per-element projector bundle."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from vembench.coefficients import (
    Coefficient,
    ElasticityCoefficient,
    check_reciprocity,
    check_spd,
    piecewise_constant_approx,
)
from vembench.errors import CoefficientError, DomainError, FormulationError
from vembench.polynomials import dim_p, identity_operator
from vembench.projectors.context import ElementContext, polynomial_dofs, trace_pairing
from vembench.projectors.dofmap import LocalSpace
from vembench.projectors.engine import ProjectorSet, TargetBlock, Weight, project
from vembench.projectors.formulations import Family, Formulation
from vembench.projectors.moments import MomentProvider
from vembench.projectors.problems import ProblemKind

logger = logging.getLogger("vembench.projectors")


@dataclass(frozen=True, eq=False)
class Material:
    """Weights of one element: elliptic projection, L2 (identity-target) projection, energy."""

    elliptic: Weight
    l2: Weight
    energy: Weight
    coefficient: Coefficient | None = None


def build_material(
    problem: ProblemKind,
    formulation: Formulation,
    context: ElementContext,
    k: int,
    coefficient: Coefficient | None = None,
    *,
    viscosity: float = 1.0,
) -> Material:
    ncomp_f = problem.ncomp_field
    identity = Weight.identity(ncomp_f)
    if problem.is_stokes:
        return Material(elliptic=identity, l2=identity, energy=Weight.constant(np.eye(ncomp_f), scale=viscosity))

    if coefficient is None:
        if formulation.is_vc or problem.name == "elasticity":
            raise CoefficientError(
                f"{formulation.name} on {problem.name} needs a coefficient.",
                details={"formulation": formulation.name, "problem": problem.name},
            )
        return Material(elliptic=identity, l2=identity, energy=identity)
    if coefficient.size != ncomp_f:
        raise CoefficientError(
            f"Coefficient '{coefficient.name}' has size {coefficient.size}, {problem.name} needs {ncomp_f}.",
        )

    rule = context.rule(2 * k + context.policy.surplus)
    if not coefficient.is_constant:
        check_spd(coefficient, rule.points)
    if isinstance(coefficient, ElasticityCoefficient):
        check_reciprocity(coefficient, rule.points)

    if formulation.is_vc:
        variable = Weight.variable(coefficient)
        return Material(elliptic=variable, l2=variable, energy=variable, coefficient=coefficient)
    if coefficient.is_constant:
        constant = Weight.constant(coefficient.value(rule.points[:1])[0])
        return Material(elliptic=constant, l2=identity, energy=constant, coefficient=coefficient)
    if problem.name == "elasticity":
        averaged = Weight.constant(piecewise_constant_approx(coefficient, rule))
        return Material(elliptic=averaged, l2=identity, energy=Weight.variable(coefficient), coefficient=coefficient)
    return Material(elliptic=identity, l2=identity, energy=Weight.variable(coefficient), coefficient=coefficient)


def elliptic_blocks(problem: ProblemKind, degree: int) -> tuple[TargetBlock, ...]:
    return (TargetBlock(problem.strain, 0, degree, kernel=True),)


def target_blocks(problem: ProblemKind, formulation: Formulation, k: int, ell: int) -> tuple[TargetBlock, ...]:
    """Target of the consistency projector of ``formulation``."""
    identity = identity_operator(problem.ncomp_field)
    if formulation.is_stabilized:
        if formulation.family is Family.P0_STABILIZED:
            return (TargetBlock(identity, 0, k - 1),)
        return elliptic_blocks(problem, k)
    version = formulation.version
    top = k + ell
    if version in (1, 2):
        return (TargetBlock(identity, 0, top - 1),)
    if version == 3:
        return (TargetBlock(identity, 0, k - 1), TargetBlock(problem.perp, k + 1, top))
    if version in (4, 5):
        return elliptic_blocks(problem, top)
    return (TargetBlock(problem.strain, 0, k, kernel=True), TargetBlock(problem.perp, k + 1, top))


def elliptic_projector(
    space: LocalSpace,
    context: ElementContext,
    moments: MomentProvider,
    weight: Weight | None = None,
    *,
    degree: int | None = None,
    self_enhanced: bool = False,
) -> ProjectorSet:
    """Energy projection onto [P_degree]^ncomp closed by the vertex-averaged kernel condition."""
    problem = space.problem
    weight = weight or Weight.identity(problem.ncomp_field)
    degree = space.k if degree is None else degree
    return project(
        space,
        context,
        elliptic_blocks(problem, degree),
        weight,
        moments,
        tag=f"elliptic-{degree}",
        self_enhanced=self_enhanced,
    )


def l2_projector(
    space: LocalSpace,
    context: ElementContext,
    moments: MomentProvider,
    degree: int,
    *,
    of_strain: bool = False,
    weight: Weight | None = None,
) -> ProjectorSet:
    """L2 projection of the functions (default) or of their strain onto degree ``degree``.

    On functions the orthonormal basis makes the projector the moment matrix itself.
    """
    problem = space.problem
    if of_strain:
        weight = weight or Weight.identity(problem.ncomp_field)
        blocks = (TargetBlock(identity_operator(problem.ncomp_field), 0, degree),)
        return project(space, context, blocks, weight, moments, tag=f"l2-strain-{degree}")

    polynomials = moments.matrix(degree)
    size = space.ncomp * dim_p(degree)
    return ProjectorSet(
        tag=f"l2-{degree}",
        degree=degree,
        field_degree=degree,
        field_ncomp=space.ncomp,
        fields=np.eye(size),
        G=np.eye(size),
        B=polynomials,
        coefficients=polynomials,
        D=polynomial_dofs(space, context, space.k),
        polynomials=polynomials,
        dof_projector=polynomial_dofs(space, context, degree) @ polynomials,
    )


def selfstab_projector(
    space: LocalSpace,
    context: ElementContext,
    moments: MomentProvider,
    formulation: Formulation,
    material: Material,
) -> ProjectorSet:
    if not formulation.is_self_stabilized:
        raise FormulationError(f"{formulation.name} is not self-stabilized.")
    expected = formulation.space_kind(space.problem)
    if space.kind is not expected or space.ell < 1:
        raise FormulationError(
            f"{formulation.name} needs a {expected} space with ell >= 1.",
            details={"formulation": formulation.name, "space": str(space.kind), "ell": space.ell},
        )
    blocks = target_blocks(space.problem, formulation, space.k, space.ell)
    weight = material.l2 if formulation.projects_gradient else material.elliptic
    return project(space, context, blocks, weight, moments, tag=formulation.name)


def elasticity_projector(
    space: LocalSpace,
    context: ElementContext,
    moments: MomentProvider,
    coefficient: Coefficient,
    *,
    variable: bool = False,
) -> ProjectorSet:
    """Elliptic projector of the elasticity energy with the rigid-body condition."""
    if space.problem.name != "elasticity":
        raise DomainError("elasticity_projector needs an elasticity space.")
    if variable:
        return vc_projector(space, context, moments, coefficient)
    rule = context.rule(2 * space.k + context.policy.surplus)
    if coefficient.is_constant:
        weight = Weight.constant(coefficient.value(rule.points[:1])[0])
    else:
        weight = Weight.constant(piecewise_constant_approx(coefficient, rule))
    return elliptic_projector(space, context, moments, weight)


def vc_projector(
    space: LocalSpace,
    context: ElementContext,
    moments: MomentProvider,
    coefficient: Coefficient,
    *,
    gradient: bool = False,
) -> ProjectorSet:
    """Coefficient-aware elliptic projector, or the coefficient-weighted L2 projection of the strain."""
    if space.problem.is_stokes:
        raise FormulationError("Variable-coefficient projectors are not defined for the Stokes problem.")
    check_spd(coefficient, context.rule(2 * space.k + context.policy.surplus).points)
    weight = Weight.variable(coefficient)
    if gradient:
        return l2_projector(space, context, moments, space.k - 1, of_strain=True, weight=weight)
    return elliptic_projector(space, context, moments, weight, self_enhanced=True)


def stokes_velocity_projector(space: LocalSpace, context: ElementContext, moments: MomentProvider) -> ProjectorSet:
    if not space.problem.is_stokes:
        raise DomainError("stokes_velocity_projector needs a Stokes space.")
    return elliptic_projector(space, context, moments)


def stokes_divergence_matrix(space: LocalSpace, context: ElementContext) -> np.ndarray:
    """b[alpha, i] = int div(phi_i) q_alpha for q_alpha of degree <= k-1."""
    if not space.problem.is_stokes:
        raise DomainError("stokes_divergence_matrix needs a Stokes space.")
    size = dim_p(space.k - 1)
    matrix = np.zeros((size, space.n_dofs))
    constant = 1.0 / np.sqrt(context.area)

    def flux(rule):
        return constant * rule.normal_weights[:, :, None]

    matrix[0] = trace_pairing(space, flux, 0)[:, 0]
    for gamma in range(1, size):
        matrix[gamma, space.div_dof(gamma)] = context.area
    return matrix


@dataclass(frozen=True, eq=False)
class ElementProjectors:
    """Everything the local stiffness and the post-processing need on one element."""

    space: LocalSpace
    context: ElementContext
    formulation: Formulation
    material: Material
    moments: MomentProvider
    enhancement: ProjectorSet
    consistency: ProjectorSet

    @property
    def elliptic(self) -> ProjectorSet:
        return self.enhancement

    def l2(self, degree: int) -> np.ndarray:
        """Coefficients of Pi0_degree phi_i, shape (ncomp * dim_p(degree), n_dofs)."""
        return self.moments.matrix(degree)


def build_element_projectors(
    space: LocalSpace,
    context: ElementContext,
    formulation: Formulation,
    material: Material,
) -> ElementProjectors:
    # one basis for every degree the element will touch
    context.basis(space.k + space.ell + 2)
    base = MomentProvider(space, context)
    if formulation.is_vc:
        enhancement = elliptic_projector(space, context, base, material.elliptic, self_enhanced=True)
    else:
        enhancement = elliptic_projector(space, context, base, material.elliptic)
    moments = MomentProvider(space, context, enhancement=enhancement.polynomials)

    if formulation.is_self_stabilized:
        consistency = selfstab_projector(space, context, moments, formulation, material)
    elif formulation.family is Family.P0_STABILIZED:
        consistency = l2_projector(space, context, moments, space.k - 1, of_strain=True, weight=material.l2)
    else:
        consistency = enhancement
    logger.debug(
        "element projectors built",
        extra={"formulation": formulation.name, "k": space.k, "ell": space.ell},
    )
    return ElementProjectors(
        space=space,
        context=context,
        formulation=formulation,
        material=material,
        moments=moments,
        enhancement=enhancement,
        consistency=consistency,
    )


__all__ = [
    "ElementProjectors",
    "Material",
    "build_element_projectors",
    "build_material",
    "elasticity_projector",
    "elliptic_blocks",
    "elliptic_projector",
    "l2_projector",
    "selfstab_projector",
    "stokes_divergence_matrix",
    "stokes_velocity_projector",
    "target_blocks",
    "vc_projector",
]
