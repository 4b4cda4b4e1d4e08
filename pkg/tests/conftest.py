from typing import Any

import numpy as np
import pytest

from vembench.config import Config
from vembench.mesh.builtin import builtin_mesh
from vembench.mesh.geometry import build_mesh


def build_test_config(**overrides: Any) -> Config:
    defaults: dict[str, Any] = {
        "LOG_LEVEL": "WARNING",
        "LOG_JSON": False,
        "METRICS_ENABLED": False,
        "BENCH_WORKERS": 1,
    }
    defaults.update(overrides)
    return Config.model_validate(defaults)


def unit_square_mesh():
    """One straight quadrilateral element filling the unit square."""
    vertices = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]
    return build_mesh("unit-square", vertices, [[(0, 1, None), (1, 2, None), (2, 3, None), (3, 0, None)]])


def pentagon_mesh():
    vertices = [[0.0, 0.0], [1.0, 0.0], [1.2, 0.6], [0.5, 1.0], [-0.2, 0.6]]
    elements = [[(0, 1, None), (1, 2, None), (2, 3, None), (3, 4, None), (4, 0, None)]]
    return build_mesh("pentagon", vertices, elements)


def relative_difference(left: np.ndarray, right: np.ndarray) -> float:
    scale = max(float(np.abs(right).max(initial=0.0)), 1.0)
    return float(np.abs(left - right).max(initial=0.0)) / scale


@pytest.fixture
def config() -> Config:
    return build_test_config()


@pytest.fixture
def quad():
    return builtin_mesh("quad")


@pytest.fixture
def voronoi5():
    return builtin_mesh("voronoi5")


@pytest.fixture
def octagon():
    return builtin_mesh("octagon")


@pytest.fixture
def bezier4():
    return builtin_mesh("bezier4")


@pytest.fixture
def unit_square():
    return unit_square_mesh()


@pytest.fixture
def pentagon():
    return pentagon_mesh()
