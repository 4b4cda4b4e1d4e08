import numpy as np
import pytest

from vembench.assembly import RankConfig, detect_augmentation, initial_ell, matrix_rank
from vembench.errors import FormulationError
from vembench.mesh.builtin import builtin_mesh
from vembench.projectors import ElementContext, build_material, get_problem, parse_formulation

LAPLACE = get_problem("laplace")


def detect(element, formulation, k, config=None):
    parsed = parse_formulation(formulation, LAPLACE)
    context = ElementContext(element)
    material = build_material(LAPLACE, parsed, context, k)
    return detect_augmentation(element, LAPLACE, parsed, k, context, material, config)


def test_matrix_rank_uses_a_relative_tolerance():
    result = matrix_rank(np.diag([1.0, 1e-3, 1e-20]))
    assert result.rank == 2
    assert result.smallest_kept == pytest.approx(1e-3)
    assert result.largest_dropped == pytest.approx(1e-20)
    assert result.tolerance == pytest.approx(3 * np.spacing(1.0))
    assert matrix_rank(np.diag([1.0, 1e-14]), RankConfig(multiplier=1e3)).rank == 1
    assert matrix_rank(np.zeros((0, 0))).rank == 0


def test_initial_ell_follows_the_dimension_condition(quad, octagon):
    v1 = parse_formulation("V1")
    # 9 dofs on a k=2 square: [P_3] already has 10 > 9 - 1 functions
    assert initial_ell(quad.elements[0], LAPLACE, v1, 2, 25) == 1
    # the 16-edge center needs 2 * 16 + 1 - 1 = 32 polynomials
    assert initial_ell(octagon.elements[0], LAPLACE, v1, 2, 25) == 5
    with pytest.raises(FormulationError):
        initial_ell(octagon.elements[0], LAPLACE, v1, 2, 4)


@pytest.mark.parametrize("formulation", ["V1", "V3", "V4", "V6"])
def test_detected_order_reaches_the_target_rank_on_squares(quad, formulation):
    for element in quad.elements:
        stiffness, diagnostics = detect(element, formulation, 2)
        assert diagnostics.rank == diagnostics.target_rank == diagnostics.n_dofs - 1
        assert 1 <= diagnostics.ell <= 2
        assert stiffness.ell == diagnostics.ell
        assert diagnostics.smallest_kept > diagnostics.tolerance
        assert diagnostics.to_dto()["element"] == element.index


def test_detection_rejects_stabilized_formulations(quad):
    with pytest.raises(FormulationError):
        detect(quad.elements[0], "S1", 2)


def test_detection_fails_when_ell_max_is_too_small(octagon):
    with pytest.raises(FormulationError) as excinfo:
        detect(octagon.elements[0], "V1", 2, RankConfig(ell_max=3))
    assert excinfo.value.code == "FORMULATION_ERROR"


@pytest.mark.parametrize(("kwargs", "field"), [({"multiplier": 0.0}, "multiplier"), ({"ell_max": 0}, "ell_max")])
def test_rank_config_validation(kwargs, field):
    with pytest.raises(FormulationError) as excinfo:
        RankConfig(**kwargs)
    assert field in excinfo.value.details


@pytest.mark.slow
@pytest.mark.parametrize("formulation", ["V1", "V3"])
def test_many_sided_elements_need_a_larger_order_at_high_degree(formulation):
    squares = builtin_mesh("quad").elements
    center = builtin_mesh("octagon").elements[0]
    square_max = max(detect(element, formulation, 8)[1].ell for element in squares)
    _, polygon = detect(center, formulation, 8)
    assert polygon.ell > square_max


@pytest.mark.slow
def test_v3_order_stays_small_on_squares_up_to_degree_ten(quad):
    for k in range(1, 11):
        orders = [detect(element, "V3", k)[1].ell for element in quad.elements]
        assert max(orders) <= 2, k
