"""Matrix-valued PDE coefficients with analytic derivatives.

Values are returned for a batch of points as arrays of shape (n, m, m).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from vembench.errors import CoefficientError, UnknownNameError
from vembench.ports.services import CoefficientFieldPort
from vembench.quadrature import QuadRule

MatrixField = Callable[[np.ndarray], np.ndarray]
ScalarField = Callable[[np.ndarray], np.ndarray]

SPD_TOL = 0.0
SYMMETRY_TOL = 1e-12
RECIPROCITY_TOL = 1e-12


def _points(points: np.ndarray) -> np.ndarray:
    return np.atleast_2d(np.asarray(points, dtype=float))


@dataclass(frozen=True, eq=False)
class ConstantCoefficient:
    name: str
    matrix: np.ndarray

    @property
    def size(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def is_constant(self) -> bool:
        return True

    def value(self, points: np.ndarray) -> np.ndarray:
        count = _points(points).shape[0]
        return np.broadcast_to(self.matrix, (count, self.size, self.size)).copy()

    def dx(self, points: np.ndarray) -> np.ndarray:
        return np.zeros((_points(points).shape[0], self.size, self.size))

    def dy(self, points: np.ndarray) -> np.ndarray:
        return self.dx(points)


@dataclass(frozen=True, eq=False)
class Coefficient2x2:
    """A(x, y) for scalar diffusion, with analytic partial derivatives."""

    name: str
    value_fn: MatrixField
    dx_fn: MatrixField
    dy_fn: MatrixField

    size = 2

    @property
    def is_constant(self) -> bool:
        return False

    def value(self, points: np.ndarray) -> np.ndarray:
        return self.value_fn(_points(points))

    def dx(self, points: np.ndarray) -> np.ndarray:
        return self.dx_fn(_points(points))

    def dy(self, points: np.ndarray) -> np.ndarray:
        return self.dy_fn(_points(points))


@dataclass(frozen=True, eq=False)
class ElasticityCoefficient:
    """Plane-stress law C(x, y) from E1, E2, G12 fields and constant Poisson ratios."""

    name: str
    e1: ScalarField
    e2: ScalarField
    g12: ScalarField
    e1_grad: ScalarField
    e2_grad: ScalarField
    g12_grad: ScalarField
    nu12: float
    nu21: float
    constant: bool = False

    size = 3

    @property
    def is_constant(self) -> bool:
        return self.constant

    def _assemble(self, e1: np.ndarray, e2: np.ndarray, g12: np.ndarray) -> np.ndarray:
        scale = 1.0 / (1.0 - self.nu12 * self.nu21)
        matrix = np.zeros((e1.size, 3, 3))
        matrix[:, 0, 0] = scale * e1
        matrix[:, 1, 1] = scale * e2
        matrix[:, 0, 1] = scale * self.nu12 * e2
        matrix[:, 1, 0] = scale * self.nu12 * e2
        matrix[:, 2, 2] = g12
        return matrix

    def value(self, points: np.ndarray) -> np.ndarray:
        points = _points(points)
        return self._assemble(self.e1(points), self.e2(points), self.g12(points))

    def _derivative(self, points: np.ndarray, axis: int) -> np.ndarray:
        points = _points(points)
        return self._assemble(
            self.e1_grad(points)[:, axis],
            self.e2_grad(points)[:, axis],
            self.g12_grad(points)[:, axis],
        )

    def dx(self, points: np.ndarray) -> np.ndarray:
        return self._derivative(points, 0)

    def dy(self, points: np.ndarray) -> np.ndarray:
        return self._derivative(points, 1)


Coefficient = ConstantCoefficient | Coefficient2x2 | ElasticityCoefficient


def isotropic_elasticity(young: float, poisson: float, *, name: str = "elastic-iso") -> ElasticityCoefficient:
    shear = young / (2.0 * (1.0 + poisson))

    def constant(value: float) -> ScalarField:
        return lambda points: np.full(points.shape[0], value)

    def zero_grad(points: np.ndarray) -> np.ndarray:
        return np.zeros((points.shape[0], 2))

    return ElasticityCoefficient(
        name=name,
        e1=constant(young),
        e2=constant(young),
        g12=constant(shear),
        e1_grad=zero_grad,
        e2_grad=zero_grad,
        g12_grad=zero_grad,
        nu12=poisson,
        nu21=poisson,
        constant=True,
    )


def isotropic_matrix(young: float, poisson: float) -> np.ndarray:
    return isotropic_elasticity(young, poisson).value(np.zeros((1, 2)))[0]


def poly_diag_coefficient() -> Coefficient2x2:
    def value(points: np.ndarray) -> np.ndarray:
        matrix = np.zeros((points.shape[0], 2, 2))
        matrix[:, 0, 0] = points[:, 0] + 1.0
        matrix[:, 1, 1] = points[:, 1] + 1.0
        return matrix

    def dx(points: np.ndarray) -> np.ndarray:
        matrix = np.zeros((points.shape[0], 2, 2))
        matrix[:, 0, 0] = 1.0
        return matrix

    def dy(points: np.ndarray) -> np.ndarray:
        matrix = np.zeros((points.shape[0], 2, 2))
        matrix[:, 1, 1] = 1.0
        return matrix

    return Coefficient2x2(name="poly-diag", value_fn=value, dx_fn=dx, dy_fn=dy)


def trig_coefficient() -> Coefficient2x2:
    pi = np.pi

    def value(points: np.ndarray) -> np.ndarray:
        cx, sy = np.cos(pi * points[:, 0]), np.sin(pi * points[:, 1])
        matrix = np.zeros((points.shape[0], 2, 2))
        matrix[:, 0, 0] = cx**4 + 1.0
        matrix[:, 0, 1] = matrix[:, 1, 0] = cx**2 * sy**2
        matrix[:, 1, 1] = sy**4 + 3.0
        return matrix

    def dx(points: np.ndarray) -> np.ndarray:
        cx, sx = np.cos(pi * points[:, 0]), np.sin(pi * points[:, 0])
        sy = np.sin(pi * points[:, 1])
        matrix = np.zeros((points.shape[0], 2, 2))
        matrix[:, 0, 0] = -4.0 * pi * cx**3 * sx
        matrix[:, 0, 1] = matrix[:, 1, 0] = -2.0 * pi * cx * sx * sy**2
        return matrix

    def dy(points: np.ndarray) -> np.ndarray:
        cx = np.cos(pi * points[:, 0])
        cy, sy = np.cos(pi * points[:, 1]), np.sin(pi * points[:, 1])
        matrix = np.zeros((points.shape[0], 2, 2))
        matrix[:, 0, 1] = matrix[:, 1, 0] = 2.0 * pi * cx**2 * sy * cy
        matrix[:, 1, 1] = 4.0 * pi * sy**3 * cy
        return matrix

    return Coefficient2x2(name="trig", value_fn=value, dx_fn=dx, dy_fn=dy)


def poly_elasticity_coefficient(
    *,
    young: float = 72000.0,
    poisson: float = 0.33,
    center: tuple[float, float] = (0.5, 0.5),
) -> ElasticityCoefficient:
    xc, yc = center

    def modulus(points: np.ndarray) -> np.ndarray:
        return young * (1.0 + 100.0 * (points[:, 0] - xc) ** 4 + (points[:, 1] - yc) ** 2)

    def modulus_grad(points: np.ndarray) -> np.ndarray:
        return young * np.column_stack((400.0 * (points[:, 0] - xc) ** 3, 2.0 * (points[:, 1] - yc)))

    shear_factor = 1.0 / (2.0 * (1.0 + poisson))
    return ElasticityCoefficient(
        name="elastic-poly",
        e1=modulus,
        e2=modulus,
        g12=lambda points: shear_factor * modulus(points),
        e1_grad=modulus_grad,
        e2_grad=modulus_grad,
        g12_grad=lambda points: shear_factor * modulus_grad(points),
        nu12=poisson,
        nu21=poisson,
    )


def builtin_coefficient(name: str, *, young: float = 72000.0, poisson: float = 0.3) -> Coefficient:
    if name == "identity":
        return ConstantCoefficient(name="identity", matrix=np.eye(2))
    if name == "poly-diag":
        return poly_diag_coefficient()
    if name == "trig":
        return trig_coefficient()
    if name == "elastic-iso":
        return isotropic_elasticity(young, poisson)
    if name == "elastic-poly":
        return poly_elasticity_coefficient()
    raise UnknownNameError(
        f"Unknown coefficient: {name}",
        details={"known": sorted(BUILTIN_COEFFICIENTS)},
    )


BUILTIN_COEFFICIENTS = ("identity", "poly-diag", "trig", "elastic-iso", "elastic-poly")


def check_spd(coefficient: CoefficientFieldPort, points: np.ndarray) -> None:
    """Raise CoefficientError unless the coefficient is symmetric positive definite at every point."""
    values = coefficient.value(points)
    asymmetry = np.abs(values - np.swapaxes(values, 1, 2)).max(initial=0.0)
    scale = max(np.abs(values).max(initial=0.0), 1.0)
    if asymmetry > SYMMETRY_TOL * scale:
        raise CoefficientError(
            f"Coefficient '{coefficient.name}' is not symmetric.",
            details={"asymmetry": float(asymmetry)},
        )
    eigenvalues = np.linalg.eigvalsh(0.5 * (values + np.swapaxes(values, 1, 2)))
    worst = int(np.argmin(eigenvalues[:, 0]))
    if eigenvalues[worst, 0] <= SPD_TOL:
        raise CoefficientError(
            f"Coefficient '{coefficient.name}' is not positive definite.",
            details={"point": np.atleast_2d(points)[worst], "min_eigenvalue": float(eigenvalues[worst, 0])},
        )
    if isinstance(coefficient, ElasticityCoefficient):
        check_reciprocity(coefficient, points)


def check_reciprocity(coefficient: ElasticityCoefficient, points: np.ndarray) -> None:
    points = _points(points)
    lhs = coefficient.nu12 * coefficient.e2(points)
    rhs = coefficient.nu21 * coefficient.e1(points)
    if np.any(np.abs(lhs - rhs) > RECIPROCITY_TOL * np.maximum(np.abs(lhs), 1.0)):
        raise CoefficientError(
            f"Coefficient '{coefficient.name}' violates nu12 E2 = nu21 E1.",
        )


def piecewise_constant_approx(coefficient: CoefficientFieldPort, rule: QuadRule) -> np.ndarray:
    """Unweighted mean of the coefficient over the rule's points."""
    if coefficient.is_constant:
        return coefficient.value(rule.points[:1])[0]
    return coefficient.value(rule.points).mean(axis=0)
