import numpy as np
import pytest
from conftest import pentagon_mesh, relative_difference

from vembench.assembly.local import local_stiffness
from vembench.coefficients import isotropic_elasticity
from vembench.errors import FormulationError
from vembench.mesh.builtin import builtin_mesh
from vembench.projectors import ElementContext, build_material, get_problem, local_space, parse_formulation, polynomial_dofs
from vembench.stabilization import STABILIZATION_KINDS, StabilizationSpec, stab_matrix, stabilization_spec, tau_mean

SQUARE_CONSISTENCY = np.array(
    [
        [0.5, 0.0, -0.5, 0.0],
        [0.0, 0.5, 0.0, -0.5],
        [-0.5, 0.0, 0.5, 0.0],
        [0.0, -0.5, 0.0, 0.5],
    ]
)
HOURGLASS = np.array([1.0, -1.0, 1.0, -1.0]) / 2.0


def stiffness(element, problem, kind, k, *, tau=1.0):
    problem_kind = get_problem(problem)
    formulation = parse_formulation(kind, problem_kind)
    space = local_space(element, problem_kind, formulation, k)
    context = ElementContext(element)
    coefficient = isotropic_elasticity(1.0, 0.3) if problem == "elasticity" else None
    material = build_material(problem_kind, formulation, context, k, coefficient)
    spec = stabilization_spec(kind, problem, tau=tau)
    return local_stiffness(space, context, formulation, material, spec)


def test_unit_square_k1_consistency_matrix(unit_square):
    local = stiffness(unit_square.elements[0], "laplace", "S1", 1)
    assert np.allclose(local.consistency, SQUARE_CONSISTENCY, atol=1e-13)
    projector = local.projectors.enhancement.dof_projector
    assert np.allclose(projector, np.full((4, 4), 0.25) + SQUARE_CONSISTENCY, atol=1e-13)


@pytest.mark.parametrize("kind", ["S1", "S2", "S3", "S5"])
def test_unit_square_k1_stabilization_is_the_hourglass_mode(unit_square, kind):
    local = stiffness(unit_square.elements[0], "laplace", kind, 1)
    expected = np.outer(HOURGLASS, HOURGLASS)
    assert np.allclose(local.stabilization, expected, atol=1e-13)
    assert np.allclose(local.matrix, SQUARE_CONSISTENCY + expected, atol=1e-13)


def test_unit_square_k1_boundary_mass_stabilization(unit_square):
    local = stiffness(unit_square.elements[0], "laplace", "S4", 1)
    expected = np.outer(HOURGLASS, HOURGLASS) / (3.0 * np.sqrt(2.0))
    assert np.allclose(local.stabilization, expected, atol=1e-13)


@pytest.mark.parametrize("problem", ["laplace", "elasticity", "stokes"])
@pytest.mark.parametrize("kind", STABILIZATION_KINDS)
@pytest.mark.parametrize("k", [2, 3])
def test_stabilization_vanishes_on_polynomials_and_is_psd(problem, kind, k):
    element = builtin_mesh("voronoi5").elements[1]
    local = stiffness(element, problem, kind, k)
    block = local.stabilization
    dofs = polynomial_dofs(local.space, local.projectors.context, k)
    scale = max(np.abs(block).max(), 1.0)
    assert np.abs(block @ dofs).max() < 1e-9 * scale
    assert np.allclose(block, block.T)
    assert np.linalg.eigvalsh(block).min() > -1e-10 * scale


@pytest.mark.parametrize("kind", STABILIZATION_KINDS)
def test_stabilized_laplace_stiffness_has_only_the_constant_kernel(kind):
    local = stiffness(pentagon_mesh().elements[0], "laplace", kind, 2)
    eigenvalues = np.linalg.eigvalsh(local.matrix)
    assert np.sum(eigenvalues < 1e-10 * eigenvalues.max()) == 1
    constant = polynomial_dofs(local.space, local.projectors.context, 0)[:, 0]
    assert np.abs(local.matrix @ constant).max() < 1e-10


def test_elasticity_stabilization_is_trace_scaled_except_s3():
    assert stabilization_spec("S1", "elasticity").trace_scaled
    assert stabilization_spec("s5", "elasticity").trace_scaled
    assert not stabilization_spec("S3", "elasticity").trace_scaled
    assert not stabilization_spec("S1", "laplace").trace_scaled
    assert stabilization_spec("S2", "stokes", viscosity=0.25).scale == 0.25

    local = stiffness(pentagon_mesh().elements[0], "elasticity", "S1", 2)
    unscaled = stab_matrix(StabilizationSpec(kind="S1"), local.projectors, local.consistency)
    expected = np.trace(local.consistency) * unscaled
    assert relative_difference(local.stabilization, expected) < 1e-12


def test_tau_mean_and_rescaling(unit_square):
    assert tau_mean(np.diag([1.0, 2.0, 3.0])) == pytest.approx(2.0)
    assert tau_mean(np.zeros((0, 0))) == 0.0

    local = stiffness(unit_square.elements[0], "laplace", "S1", 1, tau="mean")
    assert local.tau == pytest.approx(0.5)
    rescaled = local.with_tau(100.0)
    assert rescaled.tau == 100.0
    assert np.allclose(rescaled.matrix, local.consistency + 100.0 * local.stabilization)


@pytest.mark.parametrize(
    ("kwargs", "message"),
    [
        ({"kind": "S6"}, "Unknown stabilization"),
        ({"kind": "S1", "tau": "median"}, "Unknown tau policy"),
        ({"kind": "S1", "tau": 0.0}, "tau must be positive"),
        ({"kind": "S1", "tau": -1.0}, "tau must be positive"),
    ],
)
def test_stabilization_spec_validation(kwargs, message):
    with pytest.raises(FormulationError, match=message):
        StabilizationSpec(**kwargs)
