import pytest

from vembench.assembly import assemble, solve
from vembench.coefficients import builtin_coefficient, isotropic_elasticity
from vembench.mesh.builtin import builtin_mesh
from vembench.services.manufactured import build_case
from vembench.services.norms import error_norms

pytestmark = pytest.mark.slow


def energy_errors(mesh_name, problem, formulation, degrees, coefficient=None):
    mesh = builtin_mesh(mesh_name)
    errors = []
    for k in degrees:
        case = build_case("sin", problem, k, coefficient)
        system = assemble(mesh, problem, formulation, k, case, coefficient=coefficient)
        errors.append(error_norms(system, solve(system), case).err_energy)
    return errors


@pytest.mark.parametrize(("mesh_name", "formulation"), [("voronoi5", "S3"), ("octagon", "S1"), ("bezier4", "S4"), ("quad", "V3")])
def test_laplace_energy_error_decays_exponentially_in_k(mesh_name, formulation):
    errors = energy_errors(mesh_name, "laplace", formulation, range(2, 8))
    assert all(later < earlier for earlier, later in zip(errors, errors[1:]))
    assert errors[-1] < 1e-3 * errors[0]


def test_elasticity_energy_error_decays():
    errors = energy_errors("voronoi5", "elasticity", "S3", range(2, 7), isotropic_elasticity(1.0, 0.3))
    assert errors[-1] < 1e-2 * errors[0]


def test_stokes_velocity_and_pressure_converge():
    mesh = builtin_mesh("quad")
    records = []
    for k in range(2, 8):
        case = build_case("sin", "stokes", k)
        system = assemble(mesh, "stokes", "S3", k, case)
        records.append(error_norms(system, solve(system), case))
    assert records[-1].err_energy < 1e-3 * records[0].err_energy
    assert records[-1].err_pressure < 1e-2 * records[0].err_pressure


def decreasing(errors):
    return all(later < earlier for earlier, later in zip(errors, errors[1:]))


def test_stokes_velocity_error_decays_on_voronoi_cells():
    errors = energy_errors("voronoi5", "stokes", "S3", range(2, 9))
    assert decreasing(errors)
    assert errors[-1] < 1e-4 * errors[0]


@pytest.mark.parametrize(("formulation", "reduction"), [("P0-S3", 1e-2), ("S3", 1e-1)])
def test_variable_modulus_elasticity_converges_on_squares(formulation, reduction):
    errors = energy_errors("quad", "elasticity", formulation, [2, 4, 6], builtin_coefficient("elastic-poly"))
    assert decreasing(errors)
    assert errors[-1] < reduction * errors[0]


def test_variable_coefficient_projection_wins_for_a_trig_coefficient():
    coefficient = builtin_coefficient("trig")
    errors = {name: energy_errors("voronoi5", "laplace", name, [6], coefficient)[0] for name in ("VC-S3", "S3", "P0-S3")}
    assert errors["VC-S3"] < errors["S3"]
    assert errors["VC-S3"] < errors["P0-S3"]


def test_variable_coefficient_variants_agree_for_a_constant_coefficient():
    coefficient = builtin_coefficient("identity")
    errors = [energy_errors("voronoi5", "laplace", name, [4], coefficient)[0] for name in ("VC-S3", "S3", "P0-S3")]
    assert max(errors) < 10 * min(errors)


def test_variable_coefficient_elasticity_converges_on_curved_elements():
    coefficient = builtin_coefficient("elastic-poly")
    errors = energy_errors("bezier4", "elasticity", "VC-S3", [2, 4, 6, 8], coefficient)
    assert decreasing(errors)
    assert errors[-1] <= energy_errors("bezier4", "elasticity", "S3", [8], coefficient)[0]
