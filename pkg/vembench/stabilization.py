"""Stabilization forms S1..S5 on the non-polynomial part (I - Pi) of the local space."""

from __future__ import annotations

from dataclasses import dataclass
import re

import numpy as np
from scipy import linalg

from vembench.errors import DegenerateElementError, FormulationError
from vembench.projectors.context import edge_mass_matrix
from vembench.projectors.operations import ElementProjectors

STABILIZATION_KINDS = ("S1", "S2", "S3", "S4", "S5")
TRACE_SCALED_KINDS = frozenset({"S1", "S2", "S4", "S5"})
TAU_MEAN = "mean"
_KIND_PATTERN = re.compile(r"^S[1-5]$")


@dataclass(frozen=True)
class StabilizationSpec:
    kind: str
    tau: float | str = 1.0
    trace_scaled: bool = False
    scale: float = 1.0

    def __post_init__(self) -> None:
        if not _KIND_PATTERN.match(self.kind):
            raise FormulationError(f"Unknown stabilization: {self.kind}", details={"expected": STABILIZATION_KINDS})
        if isinstance(self.tau, str):
            if self.tau != TAU_MEAN:
                raise FormulationError(f"Unknown tau policy: {self.tau}", details={"expected": [TAU_MEAN]})
        elif not self.tau > 0:
            raise FormulationError("tau must be positive.", details={"tau": self.tau})

    @property
    def uses_mean_tau(self) -> bool:
        return self.tau == TAU_MEAN

    def resolve_tau(self, consistency: np.ndarray) -> float:
        if isinstance(self.tau, str):
            return tau_mean(consistency)
        return float(self.tau)


def stabilization_spec(
    kind: str,
    problem: str,
    *,
    tau: float | str = 1.0,
    viscosity: float = 1.0,
) -> StabilizationSpec:
    return StabilizationSpec(
        kind=kind.strip().upper(),
        tau=tau,
        trace_scaled=problem == "elasticity" and kind.strip().upper() in TRACE_SCALED_KINDS,
        scale=viscosity if problem == "stokes" else 1.0,
    )


def tau_mean(consistency: np.ndarray) -> float:
    """Mean eigenvalue of a symmetric matrix."""
    size = consistency.shape[0]
    if size == 0:
        return 0.0
    return float(np.trace(consistency)) / size


def _dof_form(spec: StabilizationSpec, projectors: ElementProjectors, consistency: np.ndarray) -> np.ndarray:
    space = projectors.space
    n = space.n_dofs
    if spec.kind == "S1":
        return np.eye(n)
    if spec.kind == "S2":
        selector = np.zeros(n)
        selector[space.boundary_dofs] = 1.0
        return np.diag(selector)
    if spec.kind == "S3":
        return np.diag(np.maximum(1.0, np.diag(consistency)))
    if spec.kind == "S4":
        h = space.element.diameter
        k = space.k
        low = projectors.l2(k - 2)
        return (k / h) * edge_mass_matrix(space) + (k * k / (h * h)) * (low.T @ low)

    D = projectors.enhancement.D
    try:
        solved = linalg.solve(D.T @ D, D.T, assume_a="pos")
    except (linalg.LinAlgError, ValueError) as exc:
        raise DegenerateElementError(
            f"D^T D is singular on element {space.element.index}.",
            details={"element": space.element.index, "reason": str(exc)},
        ) from exc
    return np.eye(n) - D @ solved


def stab_matrix(spec: StabilizationSpec, projectors: ElementProjectors, consistency: np.ndarray) -> np.ndarray:
    """(I - Pi)^T S (I - Pi) with Pi the elliptic projector in dof coordinates; tau not applied."""
    projector = projectors.enhancement.dof_projector
    assert projector is not None
    complement = np.eye(projectors.space.n_dofs) - projector
    matrix = complement.T @ _dof_form(spec, projectors, consistency) @ complement
    factor = spec.scale
    if spec.trace_scaled:
        factor *= float(np.trace(consistency))
    matrix = factor * matrix
    return 0.5 * (matrix + matrix.T)
