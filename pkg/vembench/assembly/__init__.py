from vembench.assembly.augmentation import (
    AugmentationDiagnostics,
    RankConfig,
    RankResult,
    detect_augmentation,
    initial_ell,
    matrix_rank,
)
from vembench.assembly.local import LocalStiffness, consistency_matrix, local_stiffness
from vembench.assembly.solver import condition_number, reduced_system, solve
from vembench.assembly.system import AssemblyOptions, GlobalSystem, assemble, build_local_stiffnesses, load_vector

__all__ = [
    "AssemblyOptions",
    "AugmentationDiagnostics",
    "GlobalSystem",
    "LocalStiffness",
    "RankConfig",
    "RankResult",
    "assemble",
    "build_local_stiffnesses",
    "condition_number",
    "consistency_matrix",
    "detect_augmentation",
    "initial_ell",
    "load_vector",
    "local_stiffness",
    "matrix_rank",
    "reduced_system",
    "solve",
]
