from __future__ import annotations

import logging

import numpy as np
from scipy import linalg, sparse
from scipy.sparse.linalg import splu

from vembench.assembly.system import GlobalSystem
from vembench.errors import SingularSystemError

logger = logging.getLogger("vembench.assembly")


def free_dofs(system: GlobalSystem) -> np.ndarray:
    mask = np.ones(system.size, dtype=bool)
    mask[system.dirichlet_dofs] = False
    return np.flatnonzero(mask)


def reduced_system(system: GlobalSystem) -> tuple[sparse.csr_matrix, np.ndarray, np.ndarray]:
    """Matrix and rhs on the free dofs, Dirichlet values lifted to the rhs."""
    free = free_dofs(system)
    matrix = system.matrix
    lifted = system.rhs - matrix[:, system.dirichlet_dofs] @ system.dirichlet_values
    return matrix[free][:, free].tocsr(), lifted[free], free


def solve(system: GlobalSystem) -> np.ndarray:
    matrix, rhs, free = reduced_system(system)
    solution = np.zeros(system.size)
    solution[system.dirichlet_dofs] = system.dirichlet_values
    if free.size == 0:
        return solution
    try:
        factor = splu(matrix.tocsc())
    except RuntimeError as exc:
        raise SingularSystemError(
            "Global matrix is numerically singular.",
            details={"n_free": int(free.size), "reason": str(exc)},
        ) from exc
    values = factor.solve(rhs)
    if not np.all(np.isfinite(values)):
        pivots = np.abs(factor.U.diagonal())
        raise SingularSystemError(
            "Global solve produced non-finite values.",
            details={
                "n_free": int(free.size),
                "min_pivot": float(pivots.min(initial=np.inf)),
                "max_pivot": float(pivots.max(initial=0.0)),
            },
        )
    solution[free] = values
    return solution


def condition_number(system: GlobalSystem) -> float:
    """sigma_max / sigma_min of the dense Dirichlet-reduced matrix; NaN for saddle-point systems."""
    if system.is_saddle_point:
        return float("nan")
    matrix, _, free = reduced_system(system)
    if free.size == 0:
        return 1.0
    values = linalg.svdvals(matrix.toarray())
    if values[-1] <= 0.0:
        return float("inf")
    return float(values[0] / values[-1])
