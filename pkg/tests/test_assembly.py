import numpy as np
import pytest

from vembench.assembly import AssemblyOptions, assemble, solve
from vembench.coefficients import isotropic_elasticity
from vembench.errors import DomainError
from vembench.mesh.builtin import builtin_mesh
from vembench.projectors import build_dofmap
from vembench.services.manufactured import build_case
from vembench.services.norms import divergence_residual, error_norms

ELASTIC = isotropic_elasticity(1.0, 0.3)


def run_patch(mesh, problem, formulation, k, coefficient=None, tau=1.0):
    case = build_case("poly", problem, k, coefficient)
    system = assemble(mesh, problem, formulation, k, case, coefficient=coefficient, options=AssemblyOptions(tau=tau))
    solution = solve(system)
    return system, solution, error_norms(system, solution, case)


@pytest.mark.parametrize("formulation", ["S1", "S2", "S3", "S4", "S5", "P0-S3"])
@pytest.mark.parametrize("k", [1, 2, 3])
def test_laplace_patch_test_with_stabilized_formulations(voronoi5, formulation, k):
    _, _, errors = run_patch(voronoi5, "laplace", formulation, k)
    assert errors.err_energy < 1e-9
    assert errors.err_l2 < 1e-9
    assert errors.err_pressure is None


@pytest.mark.parametrize("formulation", ["V1", "V2", "V3", "V4", "V5", "V6"])
def test_laplace_patch_test_with_self_stabilized_formulations(quad, formulation):
    system, _, errors = run_patch(quad, "laplace", formulation, 2)
    assert errors.err_energy < 1e-9
    assert errors.err_l2 < 1e-9
    assert system.l_max >= 1
    assert len(system.diagnostics) == quad.n_elements


@pytest.mark.parametrize("formulation", ["S3", "S5", "V3", "V6"])
def test_elasticity_patch_test(voronoi5, formulation):
    _, _, errors = run_patch(voronoi5, "elasticity", formulation, 2, ELASTIC)
    assert errors.err_energy < 1e-9
    assert errors.err_l2 < 1e-9


@pytest.mark.parametrize("formulation", ["S1", "S3", "V6"])
@pytest.mark.parametrize("k", [2, 3])
def test_stokes_patch_test_and_discrete_incompressibility(quad, formulation, k):
    system, solution, errors = run_patch(quad, "stokes", formulation, k)
    assert system.is_saddle_point
    assert system.n_pressure == quad.n_elements * (k * (k + 1) // 2)
    assert errors.err_energy < 1e-9
    assert errors.err_pressure is not None
    assert errors.err_pressure < 1e-7
    assert divergence_residual(system, solution) < 1e-9


def test_laplace_global_matrix_is_symmetric_and_sized_by_the_dofmap(quad):
    system = assemble(quad, "laplace", "S3", 2, build_case("sin", "laplace", 2))
    assert system.size == 9 + 12 + 4
    difference = system.matrix - system.matrix.T
    assert abs(difference).max() < 1e-12
    assert system.dirichlet_dofs.size == 8 + 8
    assert np.allclose(system.dirichlet_values, 0.0, atol=1e-12)
    assert not system.is_saddle_point
    assert system.l_max == 0


def test_assembly_rejects_degrees_below_the_problem_minimum(quad):
    with pytest.raises(DomainError):
        assemble(quad, "stokes", "S1", 1, build_case("sin", "stokes", 2))


def test_parallel_element_loop_matches_serial(voronoi5):
    case = build_case("sin", "laplace", 3)
    serial = assemble(voronoi5, "laplace", "S2", 3, case)
    parallel = assemble(voronoi5, "laplace", "S2", 3, case, options=AssemblyOptions(workers=3))
    expected = serial.matrix.toarray()
    np.testing.assert_allclose(parallel.matrix.toarray(), expected, rtol=1e-12, atol=1e-12 * np.abs(expected).max())
    np.testing.assert_allclose(parallel.rhs, serial.rhs, rtol=1e-12, atol=1e-14)


@pytest.mark.parametrize(
    ("problem", "expected"),
    [("laplace", 9 + 12 + 4), ("elasticity", 2 * (9 + 12) + 2 * 4), ("stokes", 2 * (9 + 12) + 4 * 2)],
)
def test_dofmap_sizes_on_the_quad_mesh(quad, problem, expected):
    assert build_dofmap(quad, problem, "S1", 2).n_dofs == expected


@pytest.mark.parametrize("name", ["voronoi5", "bezier4", "octagon"])
def test_shared_edge_nodes_get_one_global_index(name):
    mesh = builtin_mesh(name)
    dofmap = build_dofmap(mesh, "laplace", "S1", 3)
    points = dofmap.boundary_node_points
    for space, mapping in zip(dofmap.spaces, dofmap.local_to_global):
        boundary = mapping[: space.n_boundary_per_comp]
        assert np.allclose(points[boundary], space.node_points, atol=1e-12)


def test_dofmap_rejects_mismatched_augmentation_orders(quad):
    with pytest.raises(DomainError):
        build_dofmap(quad, "laplace", "V1", 2, ell=[1, 1])
    with pytest.raises(DomainError):
        build_dofmap(quad, "laplace", "V1", 2, ell=0)


STABILIZED = ["S1", "S2", "S3", "S4", "S5"]
SELF_STABILIZED = ["V1", "V2", "V3", "V4", "V5", "V6"]
# polynomials lie in the local space only on straight-edged elements
PATCH_MESHES = ["quad", "voronoi5", "octagon"]
PATCH_CASES = [
    (mesh, problem, formulation, k)
    for mesh in PATCH_MESHES
    for problem in ("laplace", "elasticity", "stokes")
    for formulation in STABILIZED + SELF_STABILIZED
    for k in range(2 if problem == "stokes" else 1, 5)
]


@pytest.mark.slow
@pytest.mark.parametrize(("mesh_name", "problem", "formulation", "k"), PATCH_CASES)
def test_patch_test_on_every_straight_edged_mesh(mesh_name, problem, formulation, k):
    coefficient = ELASTIC if problem == "elasticity" else None
    system, solution, errors = run_patch(builtin_mesh(mesh_name), problem, formulation, k, coefficient)
    assert errors.err_energy < 1e-9
    if problem == "stokes":
        assert divergence_residual(system, solution) < 1e-8


@pytest.mark.slow
@pytest.mark.parametrize("tau", [1e-3, 1e3])
@pytest.mark.parametrize("formulation", STABILIZED)
@pytest.mark.parametrize(("problem", "k"), [("laplace", 4), ("elasticity", 3), ("stokes", 3)])
def test_stabilized_patch_test_holds_for_any_tau(voronoi5, problem, formulation, k, tau):
    coefficient = ELASTIC if problem == "elasticity" else None
    _, _, errors = run_patch(voronoi5, problem, formulation, k, coefficient, tau=tau)
    assert errors.err_energy < 1e-9


@pytest.mark.slow
@pytest.mark.parametrize("formulation", ["S3", "V6"])
def test_stokes_divergence_vanishes_on_voronoi_cells(voronoi5, formulation):
    for k in range(2, 6):
        case = build_case("sin", "stokes", k)
        system = assemble(voronoi5, "stokes", formulation, k, case)
        assert divergence_residual(system, solve(system)) < 1e-8
