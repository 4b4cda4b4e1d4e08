from __future__ import annotations

from typing import Protocol

import numpy as np


class CoefficientFieldPort(Protocol):
    """Symmetric matrix-valued coefficient with analytic first derivatives."""

    name: str

    @property
    def size(self) -> int:
        ...

    @property
    def is_constant(self) -> bool:
        ...

    def value(self, points: np.ndarray) -> np.ndarray:
        ...

    def dx(self, points: np.ndarray) -> np.ndarray:
        ...

    def dy(self, points: np.ndarray) -> np.ndarray:
        ...


class ExactSolutionPort(Protocol):
    """Exact field and source term consumed by global assembly."""

    def u(self, points: np.ndarray) -> np.ndarray:
        ...

    def source(self, points: np.ndarray) -> np.ndarray:
        ...
