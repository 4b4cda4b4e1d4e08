import numpy as np
import pytest
from conftest import unit_square_mesh

from vembench.errors import DomainError, MeshValidationError, UnknownNameError
from vembench.mesh import (
    BUILTIN_MESHES,
    BezierCurve,
    bezier_derivative,
    bezier_eval,
    build_mesh,
    builtin_mesh,
    ensure_valid,
    merge_duplicate_vertices,
    validate_mesh,
)
from vembench.mesh.builtin import VORONOI_SEEDS


@pytest.mark.parametrize("name", sorted(BUILTIN_MESHES))
def test_builtin_meshes_are_valid_and_tile_the_unit_square(name):
    mesh = builtin_mesh(name)
    report = validate_mesh(mesh)
    assert report.ok, report.issues
    assert mesh.total_area == pytest.approx(1.0, abs=1e-12)
    low, high = mesh.bounding_box
    assert np.allclose(low, [0.0, 0.0])
    assert np.allclose(high, [1.0, 1.0])
    assert all(element.area > 0 for element in mesh.elements)


def test_builtin_mesh_shapes():
    assert builtin_mesh("quad").n_elements == 4
    assert builtin_mesh("voronoi5").n_elements == 5
    octagon = builtin_mesh("octagon")
    assert octagon.n_elements == 9
    assert octagon.elements[0].n_edges == 16
    bezier = builtin_mesh("bezier4")
    assert bezier.n_elements == 4
    assert all(element.is_curved for element in bezier.elements)


def test_quad_mesh_topology():
    mesh = builtin_mesh("quad")
    assert mesh.n_vertices == 9
    assert len(mesh.edge_keys) == 12
    assert len(mesh.boundary_edges) == 8
    assert mesh.boundary_vertices == frozenset(range(9)) - {4}


def test_unknown_builtin_mesh_raises_unknown_name():
    with pytest.raises(UnknownNameError) as excinfo:
        builtin_mesh("hexagon")
    assert excinfo.value.code == "UNKNOWN_NAME"
    assert "quad" in excinfo.value.details["known"]


def test_unit_square_element_geometry():
    element = unit_square_mesh().elements[0]
    assert element.area == pytest.approx(1.0, abs=1e-14)
    assert np.allclose(element.centroid, [0.5, 0.5], atol=1e-14)
    assert element.diameter == pytest.approx(np.sqrt(2.0), abs=1e-14)
    assert not element.is_curved


def test_bezier_curve_interpolates_endpoints_and_splits_continuously():
    curve = BezierCurve(np.array([[0.0, 0.5], [0.25, 0.25], [0.75, 0.75], [1.0, 0.5]]))
    assert np.allclose(bezier_eval(curve, 0.0), [0.0, 0.5])
    assert np.allclose(bezier_eval(curve, 1.0), [1.0, 0.5])
    left, right = curve.split(0.3)
    assert np.allclose(left.control_points[-1], right.control_points[0])
    assert np.allclose(left.evaluate(1.0)[0], curve.evaluate(0.3)[0])
    assert np.allclose(right.evaluate(0.5)[0], curve.evaluate(0.65)[0])


def test_bezier_derivative_of_a_straight_segment_is_constant():
    curve = BezierCurve(np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]))
    for t in (0.0, 0.4, 1.0):
        assert np.allclose(bezier_derivative(curve, t), [2.0, 2.0])


def test_bezier_parameter_outside_unit_interval_is_rejected():
    curve = BezierCurve(np.array([[0.0, 0.0], [1.0, 0.0]]))
    with pytest.raises(DomainError):
        bezier_eval(curve, 1.5)


def test_clockwise_element_is_reported():
    vertices = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]
    mesh = build_mesh("clockwise", vertices, [[(0, 3, None), (3, 2, None), (2, 1, None), (1, 0, None)]])
    report = validate_mesh(mesh)
    assert not report.ok
    assert report.issues[0]["code"] == "NONPOSITIVE_AREA"
    with pytest.raises(MeshValidationError):
        ensure_valid(mesh)


def test_open_boundary_is_reported():
    vertices = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]
    mesh = build_mesh("open", vertices, [[(0, 1, None), (1, 2, None), (3, 0, None)]])
    codes = {issue["code"] for issue in validate_mesh(mesh).issues}
    assert "OPEN_BOUNDARY" in codes


def test_merge_duplicate_vertices_renumbers_and_warns():
    vertices = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0 + 1e-16, 1.0]])
    elements = [[(0, 1, None), (1, 4, None), (2, 3, None), (3, 0, None)]]
    merged_vertices, merged_elements, warnings = merge_duplicate_vertices(vertices, elements)
    assert merged_vertices.shape == (4, 2)
    assert merged_elements[0][1][:2] == (1, 2)
    assert len(warnings) == 1
    assert "merged" in warnings[0]


def test_voronoi5_cells_are_the_voronoi_regions_of_the_fixed_seeds():
    mesh = builtin_mesh("voronoi5")
    assert len(mesh.elements) == len(VORONOI_SEEDS)
    for seed, element in zip(VORONOI_SEEDS, mesh.elements):
        distances = np.linalg.norm(element.vertices[:, None, :] - VORONOI_SEEDS[None, :, :], axis=2)
        own = np.linalg.norm(element.vertices - seed, axis=1)
        assert np.all(own <= distances.min(axis=1) + 1e-9)
    assert np.array_equal(builtin_mesh("voronoi5").vertices, mesh.vertices)
