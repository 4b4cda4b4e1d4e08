"""Scaled monomials, MGS-orthonormal element bases and constant-coefficient
differential operators.

Monomials are ordered graded-lexicographically: degree d holds (d, 0), (d-1, 1),
..., (0, d), so ``monomial_index(a, b) = d (d + 1) / 2 + b``. Vector polynomials are
component-blocked: the coefficients of component 0 come first.

Operators are kept as sums of ``M @ d^p/dx^p d^q/dy^q`` terms with small integer
matrices ``M``; composing them before touching any coefficients keeps identities
such as div(curl q) = 0 exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
import logging

import numpy as np
from scipy.linalg import solve_triangular

from vembench.errors import DegenerateElementError, DomainError
from vembench.mesh.geometry import Element
from vembench.quadrature import QuadRule, edge_parametric_rule, element_rule, points_for_exactness

logger = logging.getLogger("vembench.polynomials")

DEFAULT_REORTH_DEGREE = 6
DEGENERATE_NORM_TOL = 1e-13


def dim_p(k: int) -> int:
    if k < 0:
        return 0
    return (k + 1) * (k + 2) // 2


def monomial_index(a: int, b: int) -> int:
    degree = a + b
    return degree * (degree + 1) // 2 + b


@lru_cache(maxsize=64)
def exponents(k: int) -> np.ndarray:
    pairs = [(degree - b, b) for degree in range(k + 1) for b in range(degree + 1)]
    table = np.array(pairs, dtype=int).reshape(-1, 2)
    table.setflags(write=False)
    return table


def degree_of_index(index: int) -> int:
    degree = 0
    while dim_p(degree) <= index:
        degree += 1
    return degree


@lru_cache(maxsize=256)
def derivative_matrix(k: int, px: int, py: int) -> np.ndarray:
    """Integer matrix of d^px/dx^px d^py/dy^py on unscaled monomial coefficients."""
    size = dim_p(k)
    matrix = np.zeros((size, size))
    for column, (a, b) in enumerate(exponents(k)):
        if a < px or b < py:
            continue
        factor = 1.0
        for step in range(px):
            factor *= a - step
        for step in range(py):
            factor *= b - step
        matrix[monomial_index(a - px, b - py), column] = factor
    matrix.setflags(write=False)
    return matrix


@dataclass(frozen=True, eq=False)
class MonomialBasis:
    center: np.ndarray
    h: float
    degree: int

    @property
    def dim(self) -> int:
        return dim_p(self.degree)

    def scaled(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        points = np.atleast_2d(points)
        return (points[:, 0] - self.center[0]) / self.h, (points[:, 1] - self.center[1]) / self.h

    def evaluate(self, points: np.ndarray, degree: int | None = None) -> np.ndarray:
        return self.derivative(points, 0, 0, degree)

    def derivative(self, points: np.ndarray, px: int, py: int, degree: int | None = None) -> np.ndarray:
        degree = self.degree if degree is None else degree
        x, y = self.scaled(points)
        powers_x = np.vander(x, degree + 1, increasing=True)
        powers_y = np.vander(y, degree + 1, increasing=True)
        values = np.zeros((x.size, dim_p(degree)))
        for column, (a, b) in enumerate(exponents(degree)):
            if a < px or b < py:
                continue
            factor = 1.0
            for step in range(px):
                factor *= a - step
            for step in range(py):
                factor *= b - step
            values[:, column] = factor * powers_x[:, a - px] * powers_y[:, b - py]
        return values / self.h ** (px + py)


@dataclass(frozen=True, eq=False)
class OrthoBasis:
    """L2(E)-orthonormal basis q = R m over scaled monomials m (R lower-triangular)."""

    element: Element
    monomials: MonomialBasis
    R: np.ndarray
    gram: np.ndarray

    @property
    def degree(self) -> int:
        return self.monomials.degree

    @property
    def dim(self) -> int:
        return self.monomials.dim

    def _R(self, degree: int | None) -> np.ndarray:
        degree = self.degree if degree is None else degree
        if degree > self.degree:
            raise DomainError(
                f"Basis built up to degree {self.degree}, degree {degree} requested.",
                details={"element": self.element.index},
            )
        size = dim_p(degree)
        return self.R[:size, :size]

    def evaluate(self, points: np.ndarray, degree: int | None = None) -> np.ndarray:
        R = self._R(degree)
        return self.monomials.evaluate(points, degree if degree is not None else self.degree) @ R.T

    def derivative(self, points: np.ndarray, px: int, py: int, degree: int | None = None) -> np.ndarray:
        R = self._R(degree)
        degree = self.degree if degree is None else degree
        return self.monomials.derivative(points, px, py, degree) @ R.T

    def gradient(self, points: np.ndarray, degree: int | None = None) -> np.ndarray:
        return np.stack(
            (self.derivative(points, 1, 0, degree), self.derivative(points, 0, 1, degree)),
            axis=2,
        )

    def to_monomial(self, coefficients: np.ndarray, degree: int | None = None) -> np.ndarray:
        return self._R(degree).T @ coefficients

    def from_monomial(self, coefficients: np.ndarray, degree: int | None = None) -> np.ndarray:
        return solve_triangular(self._R(degree), coefficients, lower=True, trans="T")

    def operator_matrix(self, operator: "DifferentialOperator", degree: int | None = None) -> np.ndarray:
        """Matrix of ``operator`` on component-blocked orthonormal coefficients."""
        degree = self.degree if degree is None else degree
        R = self._R(degree)
        size = dim_p(degree)
        mono = operator.monomial_matrix(degree, self.monomials.h)
        result = np.zeros_like(mono)
        for out in range(operator.ncomp_out):
            rows = slice(out * size, (out + 1) * size)
            for inp in range(operator.ncomp_in):
                cols = slice(inp * size, (inp + 1) * size)
                block = mono[rows, cols]
                if not block.any():
                    continue
                result[rows, cols] = solve_triangular(R, block @ R.T, lower=True, trans="T")
        return result

    def constant_coefficients(self, value: float = 1.0) -> np.ndarray:
        coefficients = np.zeros(self.dim)
        coefficients[0] = value * np.sqrt(self.element.area)
        return coefficients


def monomial_moments(element: Element, max_degree: int, *, center=None, h=None) -> np.ndarray:
    """Integrals of the scaled monomials over the element, indexed by ``monomial_index``.

    Uses the divergence theorem with F = (h X^{a+1} Y^b / (a+1), 0).
    """
    if max_degree < 0:
        raise DomainError("max_degree must be nonnegative.", details={"max_degree": max_degree})
    center = element.centroid if center is None else np.asarray(center, dtype=float)
    h = element.diameter if h is None else float(h)
    basis = MonomialBasis(center=center, h=h, degree=max_degree + 1)
    table = exponents(max_degree)
    moments = np.zeros(dim_p(max_degree))
    for edge in element.edges:
        degree = edge.parametric_degree
        exact = (max_degree + 2) * degree - 1
        if edge.is_curved:
            exact = max(exact, 2 * max_degree + 8)
        rule = edge_parametric_rule(edge, exact)
        x, y = basis.scaled(rule.points)
        powers_x = np.vander(x, max_degree + 2, increasing=True)
        powers_y = np.vander(y, max_degree + 1, increasing=True)
        weights = rule.weights * rule.tangents[:, 1]
        for index, (a, b) in enumerate(table):
            integrand = powers_x[:, a + 1] * powers_y[:, b] * (h / (a + 1))
            moments[index] += weights @ integrand
    return moments


def mgs_orthonormalize(
    element: Element,
    k: int,
    *,
    reorth_degree: int = DEFAULT_REORTH_DEGREE,
    rule: QuadRule | None = None,
) -> OrthoBasis:
    """Modified Gram-Schmidt on the scaled monomials in the discrete L2(E) product.

    The element rule is exact for degree 2k, so the discrete product is the L2(E)
    product. A second pass is run when k exceeds ``reorth_degree``.
    """
    if k < 0:
        raise DomainError("Polynomial degree must be nonnegative.", details={"k": k})
    monomials = MonomialBasis(center=element.centroid, h=element.diameter, degree=k)
    rule = rule or element_rule(element, 2 * k + 2)
    sqrt_w = np.sqrt(np.clip(rule.weights, 0.0, None))
    if np.any(rule.weights < 0):
        sqrt_w = None  # type: ignore[assignment]
    values = monomials.evaluate(rule.points)
    size = values.shape[1]

    if sqrt_w is None:
        # signed weights (non-convex curved fan): orthonormalize through the Gram
        return _mgs_on_gram(element, monomials, values.T @ (rule.weights[:, None] * values), k, reorth_degree)

    columns = sqrt_w[:, None] * values
    gram = columns.T @ columns
    coefficients = np.eye(size)
    passes = 2 if k > reorth_degree else 1
    for i in range(size):
        v = columns[:, i].copy()
        scale = np.linalg.norm(v)
        c = coefficients[:, i].copy()
        for _ in range(passes):
            for j in range(i):
                r = columns[:, j] @ v
                v -= r * columns[:, j]
                c -= r * coefficients[:, j]
        norm = np.linalg.norm(v)
        if not np.isfinite(norm) or norm <= DEGENERATE_NORM_TOL * scale:
            raise DegenerateElementError(
                f"Monomial Gram matrix is numerically singular on element {element.index}.",
                details={"element": element.index, "k": k, "column": i},
            )
        columns[:, i] = v / norm
        coefficients[:, i] = c / norm
    R = np.tril(coefficients.T)
    logger.debug("orthonormal basis built", extra={"element": element.index, "k": k})
    return OrthoBasis(element=element, monomials=monomials, R=R, gram=gram)


def _mgs_on_gram(element, monomials, gram, k, reorth_degree) -> OrthoBasis:
    size = gram.shape[0]
    coefficients = np.eye(size)
    passes = 2 if k > reorth_degree else 1
    for i in range(size):
        c = coefficients[:, i].copy()
        scale = np.sqrt(gram[i, i])
        for _ in range(passes):
            for j in range(i):
                c -= (coefficients[:, j] @ gram @ c) * coefficients[:, j]
        norm_sq = c @ gram @ c
        if not np.isfinite(norm_sq) or norm_sq <= (DEGENERATE_NORM_TOL * scale) ** 2:
            raise DegenerateElementError(
                f"Monomial Gram matrix is numerically singular on element {element.index}.",
                details={"element": element.index, "k": k, "column": i},
            )
        coefficients[:, i] = c / np.sqrt(norm_sq)
    return OrthoBasis(element=element, monomials=monomials, R=np.tril(coefficients.T), gram=gram)


# --------------------------------------------------------------------------
# Differential operators
# --------------------------------------------------------------------------

Terms = tuple[tuple[tuple[int, int], np.ndarray], ...]


def _merge_terms(pairs) -> Terms:
    merged: dict[tuple[int, int], np.ndarray] = {}
    for key, matrix in pairs:
        if key in merged:
            merged[key] = merged[key] + matrix
        else:
            merged[key] = np.array(matrix, dtype=float)
    return tuple(sorted(merged.items()))


@dataclass(frozen=True, eq=False)
class DifferentialOperator:
    """Constant-coefficient operator sum_{(p,q)} M_{pq} d^p_x d^q_y on vector polynomials."""

    name: str
    ncomp_in: int
    ncomp_out: int
    terms: Terms

    @property
    def order(self) -> int:
        return max((px + py for (px, py), _ in self.terms), default=0)

    def matrix_for(self, px: int, py: int) -> np.ndarray:
        for key, matrix in self.terms:
            if key == (px, py):
                return matrix
        return np.zeros((self.ncomp_out, self.ncomp_in))

    def compose(self, inner: "DifferentialOperator", name: str | None = None) -> "DifferentialOperator":
        if inner.ncomp_out != self.ncomp_in:
            raise DomainError(f"Cannot compose {self.name} with {inner.name}.")
        pairs = [
            ((po + pi, qo + qi), outer @ matrix)
            for (po, qo), outer in self.terms
            for (pi, qi), matrix in inner.terms
        ]
        return DifferentialOperator(
            name=name or f"{self.name}.{inner.name}",
            ncomp_in=inner.ncomp_in,
            ncomp_out=self.ncomp_out,
            terms=_merge_terms(pairs),
        )

    def weighted(self, weight: np.ndarray, name: str | None = None) -> "DifferentialOperator":
        """weight @ self for a constant matrix weight."""
        weight = np.atleast_2d(np.asarray(weight, dtype=float))
        return DifferentialOperator(
            name=name or f"W.{self.name}",
            ncomp_in=self.ncomp_in,
            ncomp_out=weight.shape[0],
            terms=_merge_terms([(key, weight @ matrix) for key, matrix in self.terms]),
        )

    def transpose(self, name: str | None = None) -> "DifferentialOperator":
        """First-order formal adjoint up to sign: (Du, v) = -(u, D'v) + <u, flux(n) v>."""
        if self.order != 1 or any(px + py != 1 for (px, py), _ in self.terms):
            raise DomainError(f"{self.name} is not a homogeneous first-order operator.")
        return DifferentialOperator(
            name=name or f"{self.name}^T",
            ncomp_in=self.ncomp_out,
            ncomp_out=self.ncomp_in,
            terms=_merge_terms([(key, matrix.T) for key, matrix in self.terms]),
        )

    def flux(self, normals: np.ndarray) -> np.ndarray:
        """Boundary matrices Bx^T n_x + By^T n_y, shape (n, ncomp_in, ncomp_out)."""
        normals = np.atleast_2d(normals)
        bx = self.matrix_for(1, 0)
        by = self.matrix_for(0, 1)
        return normals[:, 0, None, None] * bx.T[None] + normals[:, 1, None, None] * by.T[None]

    def monomial_matrix(self, degree: int, h: float) -> np.ndarray:
        size = dim_p(degree)
        result = np.zeros((self.ncomp_out * size, self.ncomp_in * size))
        for (px, py), matrix in self.terms:
            scaled = derivative_matrix(degree, px, py) / h ** (px + py)
            result += np.kron(matrix, scaled)
        return result

    def apply_pointwise(self, derivatives: dict[tuple[int, int], np.ndarray]) -> np.ndarray:
        """Apply to pointwise derivative data ``{(px,py): (n, ncomp_in, ...)}``."""
        total = None
        for key, matrix in self.terms:
            contribution = np.einsum("oi,ni...->no...", matrix, derivatives[key])
            total = contribution if total is None else total + contribution
        return total


def _op(name: str, ncomp_in: int, ncomp_out: int, dx, dy) -> DifferentialOperator:
    terms = []
    if dx is not None:
        terms.append(((1, 0), np.array(dx, dtype=float).reshape(ncomp_out, ncomp_in)))
    if dy is not None:
        terms.append(((0, 1), np.array(dy, dtype=float).reshape(ncomp_out, ncomp_in)))
    return DifferentialOperator(name=name, ncomp_in=ncomp_in, ncomp_out=ncomp_out, terms=_merge_terms(terms))


def identity_operator(ncomp: int) -> DifferentialOperator:
    return DifferentialOperator(
        name=f"identity{ncomp}",
        ncomp_in=ncomp,
        ncomp_out=ncomp,
        terms=(((0, 0), np.eye(ncomp)),),
    )


GRAD = _op("grad", 1, 2, [[1], [0]], [[0], [1]])
DIV = _op("div", 2, 1, [[1, 0]], [[0, 1]])
CURL = _op("curl", 1, 2, [[0], [-1]], [[1], [0]])
EPS = _op("eps", 2, 3, [[1, 0], [0, 0], [0, 1]], [[0, 0], [0, 1], [1, 0]])
EPS_PERP = _op("eps-perp", 2, 3, [[0, 0], [0, -1], [-1, 0]], [[1, 0], [0, 0], [0, 1]])
L_SIGMA = EPS.transpose(name="L-sigma")
VGRAD = _op(
    "vgrad",
    2,
    4,
    [[1, 0], [0, 0], [0, 1], [0, 0]],
    [[0, 0], [1, 0], [0, 0], [0, 1]],
)
VDIV = VGRAD.transpose(name="vdiv")
VCURL = _op(
    "vcurl",
    2,
    4,
    [[0, 0], [-1, 0], [0, 0], [0, -1]],
    [[1, 0], [0, 0], [0, 1], [0, 0]],
)
LAPLACIAN = DIV.compose(GRAD, name="laplacian")

OPERATORS: dict[str, DifferentialOperator] = {
    op.name: op for op in (GRAD, DIV, CURL, EPS, EPS_PERP, L_SIGMA, VGRAD, VDIV, VCURL, LAPLACIAN)
}


def get_operator(name: str) -> DifferentialOperator:
    try:
        return OPERATORS[name]
    except KeyError:
        raise DomainError(f"Unknown operator: {name}", details={"known": sorted(OPERATORS)}) from None


def apply_operator(basis: OrthoBasis, op: str | DifferentialOperator, degree: int | None = None) -> np.ndarray:
    operator = get_operator(op) if isinstance(op, str) else op
    return basis.operator_matrix(operator, degree)


def evaluate_vector(basis: OrthoBasis, points: np.ndarray, coefficients: np.ndarray, ncomp: int, degree: int) -> np.ndarray:
    """Values of component-blocked polynomial fields: (n_points, ncomp, n_fields)."""
    values = basis.evaluate(points, degree)
    size = dim_p(degree)
    coefficients = coefficients.reshape(ncomp, size, -1)
    return np.einsum("pb,cbf->pcf", values, coefficients)


def evaluate_vector_derivative(
    basis: OrthoBasis, points: np.ndarray, coefficients: np.ndarray, ncomp: int, degree: int, px: int, py: int
) -> np.ndarray:
    values = basis.derivative(points, px, py, degree)
    size = dim_p(degree)
    coefficients = coefficients.reshape(ncomp, size, -1)
    return np.einsum("pb,cbf->pcf", values, coefficients)


def pad_coefficients(coefficients: np.ndarray, ncomp: int, from_degree: int, to_degree: int) -> np.ndarray:
    """Embed component-blocked coefficients of degree ``from_degree`` into ``to_degree``."""
    small = dim_p(from_degree)
    large = dim_p(to_degree)
    blocks = coefficients.reshape(ncomp, small, -1)
    padded = np.zeros((ncomp, large, blocks.shape[2]))
    keep = min(small, large)
    padded[:, :keep] = blocks[:, :keep]
    return padded.reshape(ncomp * large, -1)


def required_quadrature_points(exactness: int) -> int:
    return points_for_exactness(exactness)
