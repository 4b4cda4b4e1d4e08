"""Rank-driven choice of the augmentation order ell for self-stabilized formulations."""

from __future__ import annotations

from dataclasses import dataclass
import logging

import numpy as np
from scipy import linalg

from vembench.assembly.local import LocalStiffness, local_stiffness
from vembench.errors import FormulationError
from vembench.mesh.geometry import Element
from vembench.observability import record_detected_ell
from vembench.polynomials import dim_p
from vembench.ports.dto import AugmentationDiagnosticsDTO
from vembench.projectors.context import ElementContext
from vembench.projectors.dofmap import local_space
from vembench.projectors.formulations import Formulation
from vembench.projectors.operations import Material
from vembench.projectors.problems import ProblemKind

logger = logging.getLogger("vembench.assembly")


@dataclass(frozen=True)
class RankConfig:
    multiplier: float = 1.0
    ell_max: int = 25

    def __post_init__(self) -> None:
        if not self.multiplier > 0:
            raise FormulationError("Rank tolerance multiplier must be positive.", details={"multiplier": self.multiplier})
        if self.ell_max < 1:
            raise FormulationError("ell_max must be at least 1.", details={"ell_max": self.ell_max})

    @classmethod
    def from_config(cls, config) -> "RankConfig":
        return cls(multiplier=float(config.RANK_TOL_MULTIPLIER), ell_max=int(config.ELL_MAX))


@dataclass(frozen=True)
class RankResult:
    rank: int
    tolerance: float
    singular_values: np.ndarray

    @property
    def smallest_kept(self) -> float:
        kept = self.singular_values[: self.rank]
        return float(kept[-1]) if kept.size else 0.0

    @property
    def largest_dropped(self) -> float:
        dropped = self.singular_values[self.rank:]
        return float(dropped[0]) if dropped.size else 0.0


@dataclass(frozen=True)
class AugmentationDiagnostics:
    element: int
    ell: int
    rank: int
    target_rank: int
    n_dofs: int
    tolerance: float
    smallest_kept: float
    largest_dropped: float

    def to_dto(self) -> AugmentationDiagnosticsDTO:
        return {
            "element": self.element,
            "ell": self.ell,
            "rank": self.rank,
            "target_rank": self.target_rank,
            "n_dofs": self.n_dofs,
            "tolerance": self.tolerance,
        }


def matrix_rank(matrix: np.ndarray, config: RankConfig | None = None) -> RankResult:
    """Numerical rank with tol = max(shape) * spacing(sigma_max) * multiplier."""
    config = config or RankConfig()
    values = linalg.svdvals(matrix)
    if values.size == 0:
        return RankResult(rank=0, tolerance=0.0, singular_values=values)
    tolerance = max(matrix.shape) * float(np.spacing(values[0])) * config.multiplier
    return RankResult(rank=int(np.count_nonzero(values > tolerance)), tolerance=tolerance, singular_values=values)


def initial_ell(element: Element, problem: ProblemKind, formulation: Formulation, k: int, ell_max: int) -> int:
    """Smallest ell >= 1 for which the projected space can reach the target rank."""
    for ell in range(1, ell_max + 1):
        n_dofs = local_space(element, problem, formulation, k, ell).n_dofs
        if problem.ncomp * dim_p(k + ell) >= n_dofs - problem.kernel_dim:
            return ell
    raise FormulationError(
        f"No ell <= {ell_max} satisfies the dimension condition on element {element.index}.",
        details={"element": element.index, "k": k, "ell_max": ell_max},
    )


def detect_augmentation(
    element: Element,
    problem: ProblemKind,
    formulation: Formulation,
    k: int,
    context: ElementContext,
    material: Material,
    config: RankConfig | None = None,
) -> tuple[LocalStiffness, AugmentationDiagnostics]:
    if not formulation.is_self_stabilized:
        raise FormulationError(f"{formulation.name} does not use an augmentation order.")
    config = config or RankConfig()
    ell = initial_ell(element, problem, formulation, k, config.ell_max)
    last: dict[str, object] = {}
    while ell <= config.ell_max:
        space = local_space(element, problem, formulation, k, ell)
        stiffness = local_stiffness(space, context, formulation, material)
        result = matrix_rank(stiffness.matrix, config)
        target = space.n_dofs - problem.kernel_dim
        diagnostics = AugmentationDiagnostics(
            element=element.index,
            ell=ell,
            rank=result.rank,
            target_rank=target,
            n_dofs=space.n_dofs,
            tolerance=result.tolerance,
            smallest_kept=result.smallest_kept,
            largest_dropped=result.largest_dropped,
        )
        if result.rank >= target:
            logger.debug(
                "augmentation order selected",
                extra={"formulation": formulation.name, "k": k, "ell": ell},
            )
            record_detected_ell(ell)
            return stiffness, diagnostics
        last = dict(diagnostics.to_dto())
        ell += 1
    raise FormulationError(
        f"{formulation.name} did not reach full rank on element {element.index} with ell <= {config.ell_max}.",
        details=last or {"element": element.index, "ell_max": config.ell_max},
    )
