from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from vembench.observability import observe_local_stiffness
from vembench.projectors.context import ElementContext
from vembench.projectors.dofmap import LocalSpace
from vembench.projectors.engine import pairing_matrix
from vembench.projectors.formulations import Formulation
from vembench.projectors.operations import ElementProjectors, Material, build_element_projectors
from vembench.stabilization import StabilizationSpec, stab_matrix


@dataclass(frozen=True, eq=False)
class LocalStiffness:
    """K = K_c + tau K_s (stabilized) or K = K_c (self-stabilized) on one element."""

    matrix: np.ndarray
    consistency: np.ndarray
    projectors: ElementProjectors
    stabilization: np.ndarray | None = None
    tau: float | None = None

    @property
    def space(self) -> LocalSpace:
        return self.projectors.space

    @property
    def ell(self) -> int:
        return self.space.ell

    def with_tau(self, tau: float) -> "LocalStiffness":
        if self.stabilization is None:
            return self
        return LocalStiffness(
            matrix=self.consistency + tau * self.stabilization,
            consistency=self.consistency,
            projectors=self.projectors,
            stabilization=self.stabilization,
            tau=tau,
        )


def consistency_matrix(projectors: ElementProjectors) -> np.ndarray:
    """Energy of the projected strains: C^T E C in the consistency target."""
    projector = projectors.consistency
    fields = projector.field_coefficients
    energy = pairing_matrix(
        projectors.context,
        fields,
        fields,
        projector.field_ncomp,
        projector.field_degree,
        projectors.material.energy,
    )
    return 0.5 * (energy + energy.T)


def local_stiffness(
    space: LocalSpace,
    context: ElementContext,
    formulation: Formulation,
    material: Material,
    stabilization: StabilizationSpec | None = None,
) -> LocalStiffness:
    kind = "stabilized" if formulation.is_stabilized else "self-stabilized"
    with observe_local_stiffness(kind):
        projectors = build_element_projectors(space, context, formulation, material)
        consistency = consistency_matrix(projectors)
        if not formulation.is_stabilized:
            return LocalStiffness(matrix=consistency, consistency=consistency, projectors=projectors)
        spec = stabilization or StabilizationSpec(kind=formulation.stabilization or "S1")
        block = stab_matrix(spec, projectors, consistency)
        tau = spec.resolve_tau(consistency)
        return LocalStiffness(
            matrix=consistency + tau * block,
            consistency=consistency,
            projectors=projectors,
            stabilization=block,
            tau=tau,
        )
