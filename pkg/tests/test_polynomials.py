import numpy as np
import pytest
from conftest import pentagon_mesh, unit_square_mesh

from vembench.errors import DomainError
from vembench.mesh.builtin import builtin_mesh
from vembench.polynomials import (
    CURL,
    DIV,
    EPS,
    GRAD,
    LAPLACIAN,
    VCURL,
    VDIV,
    dim_p,
    exponents,
    get_operator,
    identity_operator,
    mgs_orthonormalize,
    monomial_index,
    pad_coefficients,
)
from vembench.quadrature import element_rule


def test_graded_indexing_is_consistent():
    assert [dim_p(k) for k in range(-1, 4)] == [0, 1, 3, 6, 10]
    for index, (a, b) in enumerate(exponents(6)):
        assert monomial_index(a, b) == index
    assert tuple(exponents(1)[1]) == (1, 0)
    assert tuple(exponents(1)[2]) == (0, 1)


@pytest.mark.parametrize(
    ("element", "k"),
    [
        (unit_square_mesh().elements[0], 4),
        (pentagon_mesh().elements[0], 8),
        (builtin_mesh("octagon").elements[0], 6),
        (builtin_mesh("bezier4").elements[2], 5),
    ],
)
def test_mgs_basis_is_orthonormal(element, k):
    basis = mgs_orthonormalize(element, k)
    rule = element_rule(element, 2 * k + 2)
    values = basis.evaluate(rule.points)
    gram = values.T @ (rule.weights[:, None] * values)
    assert np.allclose(gram, np.eye(dim_p(k)), atol=1e-10)
    assert np.allclose(np.triu(basis.R, 1), 0.0)


def test_first_basis_function_is_the_normalized_constant():
    element = pentagon_mesh().elements[0]
    basis = mgs_orthonormalize(element, 3)
    values = basis.evaluate(element.vertices)[:, 0]
    assert np.allclose(values, 1.0 / np.sqrt(element.area))
    assert np.allclose(basis.constant_coefficients(2.0)[0] * values, 2.0)


def test_monomial_round_trip():
    basis = mgs_orthonormalize(pentagon_mesh().elements[0], 5)
    coefficients = np.linspace(-1.0, 1.0, basis.dim)
    assert np.allclose(basis.from_monomial(basis.to_monomial(coefficients)), coefficients)


@pytest.mark.parametrize("operator", [GRAD, CURL, EPS, VCURL])
def test_operator_matrix_matches_pointwise_derivatives(operator):
    element = pentagon_mesh().elements[0]
    k = 4
    basis = mgs_orthonormalize(element, k)
    size = dim_p(k)
    rng = np.random.default_rng(3)
    coefficients = rng.standard_normal(operator.ncomp_in * size)
    points = element_rule(element, 4).points

    image = basis.operator_matrix(operator, k) @ coefficients
    expected = np.zeros((points.shape[0], operator.ncomp_out))
    blocks = coefficients.reshape(operator.ncomp_in, size)
    for (px, py), matrix in operator.terms:
        derivatives = basis.derivative(points, px, py, k) @ blocks.T
        expected += derivatives @ matrix.T
    actual = basis.evaluate(points, k) @ image.reshape(operator.ncomp_out, size).T
    assert np.allclose(actual, expected, atol=1e-9)


def test_divergence_of_curl_vanishes():
    composed = DIV.compose(CURL)
    assert not composed.monomial_matrix(5, 0.7).any()


def test_strain_annihilates_rigid_body_motions():
    element = unit_square_mesh().elements[0]
    basis = mgs_orthonormalize(element, 1)
    eps = basis.operator_matrix(EPS, 1)
    size = dim_p(1)
    # (-y, x) in scaled monomials is h * (-Y, X) up to the centroid shift
    rotation = np.zeros(2 * size)
    rotation[0 * size + monomial_index(0, 1)] = -1.0
    rotation[1 * size + monomial_index(1, 0)] = 1.0
    coefficients = np.concatenate(
        (basis.from_monomial(rotation[:size]), basis.from_monomial(rotation[size:]))
    )
    assert np.allclose(eps @ coefficients, 0.0, atol=1e-12)


def test_transpose_and_laplacian():
    assert VDIV.ncomp_in == 4 and VDIV.ncomp_out == 2
    assert LAPLACIAN.order == 2
    assert np.allclose(LAPLACIAN.matrix_for(2, 0), [[1.0]])
    assert np.allclose(LAPLACIAN.matrix_for(0, 2), [[1.0]])
    assert np.allclose(LAPLACIAN.matrix_for(1, 1), [[0.0]])
    with pytest.raises(DomainError):
        LAPLACIAN.transpose()


def test_flux_shape_and_identity_order():
    normals = np.array([[1.0, 0.0], [0.0, 1.0], [0.6, 0.8]])
    flux = EPS.flux(normals)
    assert flux.shape == (3, 2, 3)
    assert np.allclose(flux[0], EPS.matrix_for(1, 0).T)
    assert identity_operator(3).order == 0


def test_get_operator_rejects_unknown_names():
    assert get_operator("grad") is GRAD
    with pytest.raises(DomainError):
        get_operator("rot")


def test_pad_coefficients_embeds_and_truncates_blockwise():
    small = np.arange(6, dtype=float).reshape(6, 1)
    padded = pad_coefficients(small, 2, 1, 2)
    assert padded.shape == (12, 1)
    assert np.allclose(padded[:3, 0], [0, 1, 2])
    assert np.allclose(padded[6:9, 0], [3, 4, 5])
    assert not padded[3:6].any()
    assert np.allclose(pad_coefficients(padded, 2, 2, 1), small)
