from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from vembench.errors import UnknownNameError
from vembench.polynomials import CURL, EPS, EPS_PERP, GRAD, VCURL, VGRAD, DifferentialOperator

KernelFunctions = Callable[[np.ndarray, np.ndarray, float], np.ndarray]


def _constants(ncomp: int) -> KernelFunctions:
    def values(points: np.ndarray, center: np.ndarray, h: float) -> np.ndarray:
        result = np.zeros((points.shape[0], ncomp, ncomp))
        result[:, np.arange(ncomp), np.arange(ncomp)] = 1.0
        return result

    return values


def _rigid_body_motions(points: np.ndarray, center: np.ndarray, h: float) -> np.ndarray:
    """Translations in x and y, then the scaled infinitesimal rotation."""
    result = np.zeros((points.shape[0], 2, 3))
    result[:, 0, 0] = 1.0
    result[:, 1, 1] = 1.0
    result[:, 0, 2] = -(points[:, 1] - center[1]) / h
    result[:, 1, 2] = (points[:, 0] - center[0]) / h
    return result


@dataclass(frozen=True, eq=False)
class ProblemKind:
    name: str
    ncomp: int
    strain: DifferentialOperator
    perp: DifferentialOperator
    kernel_dim: int
    kernel_functions: KernelFunctions
    min_degree: int = 1

    @property
    def ncomp_field(self) -> int:
        return self.strain.ncomp_out

    @property
    def is_stokes(self) -> bool:
        return self.name == "stokes"

    @property
    def perp_is_divergence_free(self) -> bool:
        """True when the transposed strain annihilates the perp operator exactly."""
        composed = self.strain.transpose().compose(self.perp)
        return all(not matrix.any() for _, matrix in composed.terms)


LAPLACE = ProblemKind(
    name="laplace",
    ncomp=1,
    strain=GRAD,
    perp=CURL,
    kernel_dim=1,
    kernel_functions=_constants(1),
)
ELASTICITY = ProblemKind(
    name="elasticity",
    ncomp=2,
    strain=EPS,
    perp=EPS_PERP,
    kernel_dim=3,
    kernel_functions=_rigid_body_motions,
)
STOKES = ProblemKind(
    name="stokes",
    ncomp=2,
    strain=VGRAD,
    perp=VCURL,
    kernel_dim=2,
    kernel_functions=_constants(2),
    min_degree=2,
)

PROBLEMS: dict[str, ProblemKind] = {problem.name: problem for problem in (LAPLACE, ELASTICITY, STOKES)}


def get_problem(name: str | ProblemKind) -> ProblemKind:
    if isinstance(name, ProblemKind):
        return name
    try:
        return PROBLEMS[(name or "").strip().lower()]
    except KeyError:
        raise UnknownNameError(f"Unknown problem: {name}", details={"known": sorted(PROBLEMS)}) from None
