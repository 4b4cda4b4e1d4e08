import numpy as np
import pytest
from conftest import pentagon_mesh, unit_square_mesh

from vembench.errors import DomainError
from vembench.mesh.builtin import builtin_mesh
from vembench.polynomials import dim_p, exponents, monomial_moments
from vembench.quadrature import edge_rule, element_rule, gauss_legendre, gauss_lobatto, points_for_exactness


@pytest.mark.parametrize("n", [1, 2, 5, 12])
def test_gauss_legendre_integrates_up_to_its_exactness(n):
    rule = gauss_legendre(n)
    for degree in range(rule.exactness + 1):
        exact = 0.0 if degree % 2 else 2.0 / (degree + 1)
        assert rule.integrate(rule.points**degree) == pytest.approx(exact, abs=1e-13)


@pytest.mark.parametrize("n", [2, 3, 6, 11])
def test_gauss_lobatto_includes_endpoints_and_is_exact(n):
    rule = gauss_lobatto(n)
    assert rule.points[0] == -1.0
    assert rule.points[-1] == 1.0
    assert np.all(np.diff(rule.points) > 0)
    for degree in range(rule.exactness + 1):
        exact = 0.0 if degree % 2 else 2.0 / (degree + 1)
        assert rule.integrate(rule.points**degree) == pytest.approx(exact, abs=1e-13)


def test_rules_reject_too_few_points():
    with pytest.raises(DomainError):
        gauss_legendre(0)
    with pytest.raises(DomainError):
        gauss_lobatto(1)


def test_points_for_exactness():
    assert points_for_exactness(0) == 1
    assert points_for_exactness(1) == 1
    assert points_for_exactness(2) == 2
    assert points_for_exactness(9) == 5


def test_edge_rule_measures_arc_length():
    mesh = builtin_mesh("bezier4")
    for element in mesh.elements:
        for edge in element.edges:
            rule = edge_rule(edge, 40)
            assert rule.weights.sum() == pytest.approx(edge.length(), rel=1e-8)


@pytest.mark.parametrize("exactness", [0, 3, 8])
def test_element_rule_integrates_monomials_on_the_unit_square(exactness):
    rule = element_rule(unit_square_mesh().elements[0], exactness)
    x, y = rule.points[:, 0], rule.points[:, 1]
    for a, b in exponents(exactness):
        exact = 1.0 / ((a + 1) * (b + 1))
        assert rule.integrate(x**a * y**b) == pytest.approx(exact, abs=1e-13)


@pytest.mark.parametrize("name", ["quad", "voronoi5", "octagon", "bezier4"])
def test_element_rules_cover_the_unit_square(name):
    mesh = builtin_mesh(name)
    total = 0.0
    for element in mesh.elements:
        rule = element_rule(element, 7)
        x, y = rule.points[:, 0], rule.points[:, 1]
        total += rule.integrate(x**2 * y**3)
        assert rule.weights.sum() == pytest.approx(element.area, rel=1e-12)
    assert total == pytest.approx(1.0 / 12.0, abs=1e-12)


@pytest.mark.parametrize("element", [pentagon_mesh().elements[0], *builtin_mesh("bezier4").elements])
def test_boundary_moments_match_element_quadrature(element):
    degree = 5
    moments = monomial_moments(element, degree)
    rule = element_rule(element, degree + 4)
    h = element.diameter
    x = (rule.points[:, 0] - element.centroid[0]) / h
    y = (rule.points[:, 1] - element.centroid[1]) / h
    reference = np.array([rule.integrate(x**a * y**b) for a, b in exponents(degree)])
    assert moments.shape == (dim_p(degree),)
    assert np.allclose(moments, reference, atol=1e-12, rtol=1e-9)
    assert moments[0] == pytest.approx(element.area, rel=1e-12)
