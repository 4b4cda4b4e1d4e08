"""Manufactured solutions: exact fields, strains and the matching source terms.

Fields expose ``derivative(points, px, py) -> (n, ncomp)`` so the source
-D'(W D u) (+ grad p) is formed generically from the problem's strain operator.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol

import numpy as np
from numpy.polynomial import polynomial as P

from vembench.coefficients import Coefficient
from vembench.errors import DomainError, UnknownNameError
from vembench.projectors.problems import ProblemKind, get_problem


class DifferentiableField(Protocol):
    ncomp: int

    def derivative(self, points: np.ndarray, px: int, py: int) -> np.ndarray:
        ...


@dataclass(frozen=True)
class SineTerm:
    """c * sin(ax x + phase_x) * sin(ay y + phase_y)."""

    coefficient: float
    ax: float
    phase_x: float
    ay: float
    phase_y: float

    def derivative(self, points: np.ndarray, px: int, py: int) -> np.ndarray:
        x, y = points[:, 0], points[:, 1]
        fx = self.ax**px * np.sin(self.ax * x + self.phase_x + px * np.pi / 2)
        fy = self.ay**py * np.sin(self.ay * y + self.phase_y + py * np.pi / 2)
        return self.coefficient * fx * fy


@dataclass(frozen=True)
class SeparableField:
    components: tuple[tuple[SineTerm, ...], ...]

    @property
    def ncomp(self) -> int:
        return len(self.components)

    def derivative(self, points: np.ndarray, px: int, py: int) -> np.ndarray:
        points = np.atleast_2d(points)
        out = np.zeros((points.shape[0], self.ncomp))
        for comp, terms in enumerate(self.components):
            for term in terms:
                out[:, comp] += term.derivative(points, px, py)
        return out


@dataclass(frozen=True, eq=False)
class PolynomialField:
    """Components as 2-D power-series coefficient arrays c[i, j] x^i y^j."""

    components: tuple[np.ndarray, ...]

    @property
    def ncomp(self) -> int:
        return len(self.components)

    @property
    def degree(self) -> int:
        degree = 0
        for coefficients in self.components:
            rows, cols = np.nonzero(coefficients)
            if rows.size:
                degree = max(degree, int((rows + cols).max()))
        return degree

    def derivative(self, points: np.ndarray, px: int, py: int) -> np.ndarray:
        points = np.atleast_2d(points)
        out = np.zeros((points.shape[0], self.ncomp))
        for comp, coefficients in enumerate(self.components):
            derived = P.polyder(P.polyder(coefficients, px, axis=0), py, axis=1)
            out[:, comp] = P.polyval2d(points[:, 0], points[:, 1], derived)
        return out


@dataclass(frozen=True, eq=False)
class ManufacturedCase:
    name: str
    problem: ProblemKind
    field: DifferentiableField
    coefficient: Coefficient | None = None
    viscosity: float = 1.0
    pressure_field: DifferentiableField | None = None
    polynomial_degree: int | None = field(default=None)

    def u(self, points: np.ndarray) -> np.ndarray:
        return self.field.derivative(np.atleast_2d(points), 0, 0)

    def grad_u(self, points: np.ndarray) -> np.ndarray:
        """Jacobian, shape (n, ncomp, 2)."""
        points = np.atleast_2d(points)
        return np.stack((self.field.derivative(points, 1, 0), self.field.derivative(points, 0, 1)), axis=2)

    def _strain(self, points: np.ndarray, shift: tuple[int, int] = (0, 0)) -> np.ndarray:
        strain = self.problem.strain
        total = np.zeros((points.shape[0], strain.ncomp_out))
        for (px, py), matrix in strain.terms:
            total += self.field.derivative(points, px + shift[0], py + shift[1]) @ matrix.T
        return total

    def strain(self, points: np.ndarray) -> np.ndarray:
        return self._strain(np.atleast_2d(points))

    def weight(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        size = self.problem.ncomp_field
        if self.coefficient is not None:
            return self.coefficient.value(points)
        return np.broadcast_to(self.viscosity * np.eye(size), (points.shape[0], size, size))

    def _weight_derivative(self, points: np.ndarray, axis: int) -> np.ndarray:
        size = self.problem.ncomp_field
        if self.coefficient is None:
            return np.zeros((points.shape[0], size, size))
        return self.coefficient.dx(points) if axis == 0 else self.coefficient.dy(points)

    def source(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        strain = self.problem.strain
        values = self._strain(points)
        weight = self.weight(points)
        total = np.zeros((points.shape[0], self.problem.ncomp))
        for axis, key in enumerate(((1, 0), (0, 1))):
            derived = self._strain(points, key)
            flux = np.einsum("nij,nj->ni", self._weight_derivative(points, axis), values)
            flux += np.einsum("nij,nj->ni", weight, derived)
            total -= flux @ strain.matrix_for(*key)
        if self.pressure_field is not None:
            total += np.hstack(
                (self.pressure_field.derivative(points, 1, 0), self.pressure_field.derivative(points, 0, 1))
            )
        return total

    def pressure(self, points: np.ndarray) -> np.ndarray:
        if self.pressure_field is None:
            raise DomainError(f"Case '{self.name}' has no pressure.")
        return self.pressure_field.derivative(np.atleast_2d(points), 0, 0)[:, 0]


PI = np.pi
_SIN_SIN = SineTerm(1.0, PI, 0.0, PI, 0.0)


def sine_case(problem: str | ProblemKind, coefficient: Coefficient | None = None, *, viscosity: float = 1.0) -> ManufacturedCase:
    """The trigonometric benchmark solution vanishing on the unit-square boundary."""
    kind = get_problem(problem)
    if kind.name == "laplace":
        field_ = SeparableField(((_SIN_SIN,),))
        return ManufacturedCase("sin-sin", kind, field_, coefficient=coefficient)
    if kind.name == "elasticity":
        field_ = SeparableField(((_SIN_SIN,), (_SIN_SIN,)))
        return ManufacturedCase("sin-sin", kind, field_, coefficient=coefficient)
    # (1 - cos 2 pi x) sin 2 pi y / 4 and its rotated partner; divergence free
    half_pi = PI / 2
    u1 = (SineTerm(0.25, 0.0, half_pi, 2 * PI, 0.0), SineTerm(-0.25, 2 * PI, half_pi, 2 * PI, 0.0))
    u2 = (SineTerm(-0.25, 2 * PI, 0.0, 0.0, half_pi), SineTerm(0.25, 2 * PI, 0.0, 2 * PI, half_pi))
    pressure = SeparableField(((SineTerm(1.0, PI, 0.0, PI, half_pi),),))
    return ManufacturedCase(
        "stokes-trig",
        kind,
        SeparableField((u1, u2)),
        viscosity=viscosity,
        pressure_field=pressure,
    )


def _graded(k: int, sign: float, stride: int) -> np.ndarray:
    coefficients = np.zeros((k + 1, k + 1))
    for i in range(k + 1):
        for j in range(k + 1 - i):
            coefficients[i, j] = sign**i / (1.0 + i + stride * j)
    return coefficients


def polynomial_case(
    problem: str | ProblemKind,
    k: int,
    coefficient: Coefficient | None = None,
    *,
    viscosity: float = 1.0,
) -> ManufacturedCase:
    """A full degree-k polynomial solution, reproduced exactly by a degree-k discretization."""
    kind = get_problem(problem)
    if k < kind.min_degree:
        raise DomainError(f"k={k} is below the minimum degree for {kind.name}.")
    if kind.name == "laplace":
        field_ = PolynomialField((_graded(k, 1.0, 1),))
        return ManufacturedCase(f"poly-{k}", kind, field_, coefficient=coefficient, polynomial_degree=k)
    if kind.name == "elasticity":
        field_ = PolynomialField((_graded(k, 1.0, 1), _graded(k, -1.0, 2)))
        return ManufacturedCase(f"poly-{k}", kind, field_, coefficient=coefficient, polynomial_degree=k)
    stream = _graded(k + 1, 1.0, 1)
    velocity = PolynomialField((P.polyder(stream, 1, axis=1), -P.polyder(stream, 1, axis=0)))
    # (x - 1/2)(y - 1/2)^(k-2): zero mean on the unit square
    pressure_coefficients = np.outer([-0.5, 1.0], P.polypow([-0.5, 1.0], k - 2))
    return ManufacturedCase(
        f"poly-{k}",
        kind,
        velocity,
        viscosity=viscosity,
        pressure_field=PolynomialField((pressure_coefficients,)),
        polynomial_degree=k,
    )


CASES = ("sin", "poly")


def build_case(
    name: str,
    problem: str | ProblemKind,
    k: int,
    coefficient: Coefficient | None = None,
    *,
    viscosity: float = 1.0,
) -> ManufacturedCase:
    normalized = (name or "").strip().lower()
    if normalized == "sin":
        return sine_case(problem, coefficient, viscosity=viscosity)
    if normalized == "poly":
        return polynomial_case(problem, k, coefficient, viscosity=viscosity)
    raise UnknownNameError(f"Unknown manufactured case: {name}", details={"known": list(CASES)})
