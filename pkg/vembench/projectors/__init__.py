from vembench.projectors.context import ElementContext, QuadraturePolicy, polynomial_dofs
from vembench.projectors.dofmap import GlobalDofMap, LocalSpace, build_dofmap, local_space
from vembench.projectors.engine import ProjectorSet, TargetBlock, Weight, project
from vembench.projectors.formulations import Family, Formulation, SpaceKind, parse_formulation
from vembench.projectors.moments import MomentProvider
from vembench.projectors.operations import (
    ElementProjectors,
    Material,
    build_element_projectors,
    build_material,
    elasticity_projector,
    elliptic_projector,
    l2_projector,
    selfstab_projector,
    stokes_divergence_matrix,
    stokes_velocity_projector,
    target_blocks,
    vc_projector,
)
from vembench.projectors.problems import ELASTICITY, LAPLACE, PROBLEMS, STOKES, ProblemKind, get_problem

__all__ = [
    "ELASTICITY",
    "LAPLACE",
    "PROBLEMS",
    "STOKES",
    "ElementContext",
    "ElementProjectors",
    "Family",
    "Formulation",
    "GlobalDofMap",
    "LocalSpace",
    "Material",
    "MomentProvider",
    "ProblemKind",
    "ProjectorSet",
    "QuadraturePolicy",
    "SpaceKind",
    "TargetBlock",
    "Weight",
    "build_dofmap",
    "build_element_projectors",
    "build_material",
    "elasticity_projector",
    "elliptic_projector",
    "get_problem",
    "l2_projector",
    "local_space",
    "parse_formulation",
    "polynomial_dofs",
    "project",
    "selfstab_projector",
    "stokes_divergence_matrix",
    "stokes_velocity_projector",
    "target_blocks",
    "vc_projector",
]
