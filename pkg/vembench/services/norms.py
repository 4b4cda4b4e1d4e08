from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from vembench.assembly.system import GlobalSystem
from vembench.polynomials import dim_p, evaluate_vector, evaluate_vector_derivative
from vembench.ports.dto import ErrorRecordDTO
from vembench.projectors.operations import stokes_divergence_matrix
from vembench.services.manufactured import ManufacturedCase


@dataclass(frozen=True)
class ErrorRecord:
    err_energy: float
    err_l2: float
    err_pressure: float | None = None

    @property
    def is_finite(self) -> bool:
        values = [self.err_energy, self.err_l2]
        if self.err_pressure is not None:
            values.append(self.err_pressure)
        return all(math.isfinite(value) for value in values)

    def to_dto(self) -> ErrorRecordDTO:
        return {"err_energy": self.err_energy, "err_l2": self.err_l2, "err_pressure": self.err_pressure}


def _relative(error: float, reference: float) -> float:
    error = math.sqrt(max(error, 0.0))
    reference = math.sqrt(max(reference, 0.0))
    if reference == 0.0:
        return error
    return error / reference


def _pressure_values(system: GlobalSystem, solution: np.ndarray, stiffness, points: np.ndarray) -> np.ndarray:
    assert system.pressure_offsets is not None
    element = stiffness.space.element
    size = dim_p(system.k - 1)
    start = system.pressure_offsets[element.index]
    coefficients = solution[start:start + size]
    basis = stiffness.projectors.context.basis(system.k - 1)
    return basis.evaluate(points, system.k - 1) @ coefficients


def error_norms(system: GlobalSystem, solution: np.ndarray, case: ManufacturedCase) -> ErrorRecord:
    """Relative energy and L2 errors of Pi0_k u_h; relative L2 pressure error for Stokes.

    The energy norm is weighted by the problem coefficient (nu for Stokes). Norms
    fall back to absolute values when the exact solution has zero norm.
    """
    problem = system.problem
    strain = problem.strain
    k = system.k
    energy = [0.0, 0.0]
    l2 = [0.0, 0.0]
    pressure = [0.0, 0.0]
    pressure_mean = [0.0, 0.0, 0.0]
    pressure_samples = []

    for stiffness, mapping in zip(system.locals, system.dofmap.local_to_global):
        projectors = stiffness.projectors
        context = projectors.context
        rule = context.rule(2 * k + context.policy.error_surplus)
        points, weights = rule.points, rule.weights
        basis = context.basis(k)
        coefficients = projectors.moments.matrix(k) @ solution[mapping]

        uh = evaluate_vector(basis, points, coefficients, problem.ncomp, k)[:, :, 0]
        strain_h = np.zeros((points.shape[0], strain.ncomp_out))
        for (px, py), matrix in strain.terms:
            derivative = evaluate_vector_derivative(basis, points, coefficients, problem.ncomp, k, px, py)[:, :, 0]
            strain_h += derivative @ matrix.T

        exact_strain = case.strain(points)
        weight = case.weight(points)
        difference = exact_strain - strain_h
        energy[0] += float(np.einsum("q,qi,qij,qj->", weights, difference, weight, difference))
        energy[1] += float(np.einsum("q,qi,qij,qj->", weights, exact_strain, weight, exact_strain))
        exact_u = case.u(points)
        l2[0] += float(weights @ np.sum((exact_u - uh) ** 2, axis=1))
        l2[1] += float(weights @ np.sum(exact_u**2, axis=1))

        if system.is_saddle_point:
            ph = _pressure_values(system, solution, stiffness, points)
            p = case.pressure(points)
            pressure_mean[0] += float(weights @ ph)
            pressure_mean[1] += float(weights @ p)
            pressure_mean[2] += float(weights.sum())
            pressure_samples.append((weights, ph, p))

    err_pressure = None
    if system.is_saddle_point:
        area = pressure_mean[2]
        shift_h = pressure_mean[0] / area
        shift = pressure_mean[1] / area
        for weights, ph, p in pressure_samples:
            exact = p - shift
            pressure[0] += float(weights @ (exact - (ph - shift_h)) ** 2)
            pressure[1] += float(weights @ exact**2)
        err_pressure = _relative(*pressure)

    return ErrorRecord(
        err_energy=_relative(*energy),
        err_l2=_relative(*l2),
        err_pressure=err_pressure,
    )


def divergence_residual(system: GlobalSystem, solution: np.ndarray) -> float:
    """Largest |int div u_h q| over elements and q in P_{k-1}, relative to the velocity size."""
    if not system.problem.is_stokes:
        return 0.0
    scale = max(float(np.abs(solution[: system.n_velocity]).max(initial=0.0)), 1.0)
    worst = 0.0
    for stiffness, mapping in zip(system.locals, system.dofmap.local_to_global):
        divergence = stokes_divergence_matrix(stiffness.space, stiffness.projectors.context)
        worst = max(worst, float(np.abs(divergence @ solution[mapping]).max(initial=0.0)))
    return worst / scale
