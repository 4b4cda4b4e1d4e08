"""Global assembly: scatter-add of local matrices, load vector, Dirichlet data.

For Stokes the velocity block is bordered by the divergence pairing against the
per-element pressure space P_{k-1} and one zero-mean pressure multiplier:

    [[ A  , -B^T, 0 ],
     [ -B ,  0  , c ],
     [ 0  ,  c^T, 0 ]]
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import logging

import numpy as np
from scipy import sparse

from vembench.assembly.augmentation import AugmentationDiagnostics, RankConfig, detect_augmentation
from vembench.assembly.local import LocalStiffness, local_stiffness
from vembench.coefficients import Coefficient
from vembench.errors import DomainError
from vembench.mesh.geometry import Element, Mesh
from vembench.polynomials import dim_p
from vembench.ports.services import ExactSolutionPort
from vembench.projectors.context import ElementContext, QuadraturePolicy
from vembench.projectors.dofmap import GlobalDofMap, dofmap_from_spaces, local_space
from vembench.projectors.formulations import Formulation, parse_formulation
from vembench.projectors.operations import build_material, stokes_divergence_matrix
from vembench.projectors.problems import ProblemKind, get_problem
from vembench.stabilization import StabilizationSpec, stabilization_spec

logger = logging.getLogger("vembench.assembly")


@dataclass(frozen=True)
class AssemblyOptions:
    tau: float | str = 1.0
    rank: RankConfig = field(default_factory=RankConfig)
    policy: QuadraturePolicy = field(default_factory=QuadraturePolicy)
    viscosity: float = 1.0
    workers: int = 1

    @classmethod
    def from_config(cls, config, problem: str, *, tau: float | str | None = None, rank: RankConfig | None = None):
        return cls(
            tau=config.default_tau(problem) if tau is None else tau,
            rank=rank or RankConfig.from_config(config),
            policy=QuadraturePolicy.from_config(config),
            viscosity=float(config.STOKES_VISCOSITY),
            workers=int(config.BENCH_WORKERS),
        )


@dataclass(frozen=True, eq=False)
class GlobalSystem:
    problem: ProblemKind
    formulation: Formulation
    k: int
    matrix: sparse.csr_matrix
    rhs: np.ndarray
    dofmap: GlobalDofMap
    locals: tuple[LocalStiffness, ...]
    dirichlet_dofs: np.ndarray
    dirichlet_values: np.ndarray
    n_velocity: int
    n_pressure: int = 0
    pressure_offsets: np.ndarray | None = None
    diagnostics: tuple[AugmentationDiagnostics, ...] = ()

    @property
    def is_saddle_point(self) -> bool:
        return self.n_pressure > 0

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    @property
    def l_max(self) -> int:
        return max((stiffness.ell for stiffness in self.locals), default=0)


def _element_stiffness(
    element: Element,
    problem: ProblemKind,
    formulation: Formulation,
    k: int,
    coefficient: Coefficient | None,
    options: AssemblyOptions,
    spec: StabilizationSpec | None,
) -> tuple[LocalStiffness, AugmentationDiagnostics | None]:
    context = ElementContext(element, options.policy)
    material = build_material(problem, formulation, context, k, coefficient, viscosity=options.viscosity)
    if formulation.is_self_stabilized:
        return detect_augmentation(element, problem, formulation, k, context, material, options.rank)
    space = local_space(element, problem, formulation, k)
    return local_stiffness(space, context, formulation, material, spec), None


def build_local_stiffnesses(
    mesh: Mesh,
    problem: ProblemKind,
    formulation: Formulation,
    k: int,
    coefficient: Coefficient | None,
    options: AssemblyOptions,
) -> tuple[list[LocalStiffness], list[AugmentationDiagnostics]]:
    spec = None
    if formulation.is_stabilized:
        assert formulation.stabilization is not None
        spec = stabilization_spec(formulation.stabilization, problem.name, tau=options.tau, viscosity=options.viscosity)

    def build(element: Element):
        return _element_stiffness(element, problem, formulation, k, coefficient, options, spec)

    if options.workers > 1:
        with ThreadPoolExecutor(max_workers=options.workers) as pool:
            results = list(pool.map(build, mesh.elements))
    else:
        results = [build(element) for element in mesh.elements]
    locals_ = [stiffness for stiffness, _ in results]
    diagnostics = [item for _, item in results if item is not None]
    return locals_, diagnostics


def load_vector(stiffness: LocalStiffness, case: ExactSolutionPort) -> np.ndarray:
    """(Pi0_k f, phi_i) = sum_beta f_beta int phi_i q_beta."""
    projectors = stiffness.projectors
    context = projectors.context
    k = projectors.space.k
    rule = context.rule(2 * k + context.policy.error_surplus)
    values = context.basis(k).evaluate(rule.points, k) * rule.weights[:, None]
    source = case.source(rule.points)
    projected = (values.T @ source).T.reshape(-1)
    return projectors.moments.matrix(k).T @ projected


def _scatter(
    size: int,
    blocks: list[tuple[np.ndarray, np.ndarray, np.ndarray]],
) -> sparse.csr_matrix:
    rows, cols, data = [], [], []
    for row_map, col_map, block in blocks:
        rr, cc = np.meshgrid(row_map, col_map, indexing="ij")
        rows.append(rr.ravel())
        cols.append(cc.ravel())
        data.append(block.ravel())
    if not rows:
        return sparse.csr_matrix((size, size))
    matrix = sparse.coo_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
        shape=(size, size),
    )
    return matrix.tocsr()


def assemble(
    mesh: Mesh,
    problem: str | ProblemKind,
    formulation: str | Formulation,
    k: int,
    case: ExactSolutionPort,
    *,
    coefficient: Coefficient | None = None,
    options: AssemblyOptions | None = None,
    locals_: list[LocalStiffness] | None = None,
) -> GlobalSystem:
    options = options or AssemblyOptions()
    kind = get_problem(problem)
    parsed = parse_formulation(formulation, kind)
    if k < kind.min_degree:
        raise DomainError(f"k={k} is below the minimum degree {kind.min_degree} for {kind.name}.", details={"k": k})

    diagnostics: list[AugmentationDiagnostics] = []
    if locals_ is None:
        locals_, diagnostics = build_local_stiffnesses(mesh, kind, parsed, k, coefficient, options)
    dofmap = dofmap_from_spaces(mesh, kind, k, [stiffness.space for stiffness in locals_])
    n_velocity = dofmap.n_dofs

    blocks = []
    rhs = np.zeros(n_velocity)
    for stiffness, mapping in zip(locals_, dofmap.local_to_global):
        blocks.append((mapping, mapping, stiffness.matrix))
        np.add.at(rhs, mapping, load_vector(stiffness, case))

    n_pressure = 0
    pressure_offsets = None
    if kind.is_stokes:
        per_element = dim_p(k - 1)
        pressure_offsets = n_velocity + per_element * np.arange(mesh.n_elements + 1)
        n_pressure = per_element * mesh.n_elements
        multiplier = n_velocity + n_pressure
        size = multiplier + 1
        for stiffness, mapping in zip(locals_, dofmap.local_to_global):
            element = stiffness.space.element
            divergence = stokes_divergence_matrix(stiffness.space, stiffness.projectors.context)
            pressure = pressure_offsets[element.index] + np.arange(per_element)
            blocks.append((pressure, mapping, -divergence))
            blocks.append((mapping, pressure, -divergence.T))
            mean = np.array([[np.sqrt(element.area)]])
            blocks.append((pressure[:1], np.array([multiplier]), mean))
            blocks.append((np.array([multiplier]), pressure[:1], mean))
        rhs = np.concatenate((rhs, np.zeros(n_pressure + 1)))
    else:
        size = n_velocity

    matrix = _scatter(size, blocks)
    dirichlet_dofs = dofmap.dirichlet_dofs
    dirichlet_values = dofmap.dirichlet_values(case.u)
    logger.debug(
        "global system assembled",
        extra={"problem": kind.name, "formulation": parsed.name, "k": k},
    )
    return GlobalSystem(
        problem=kind,
        formulation=parsed,
        k=k,
        matrix=matrix,
        rhs=rhs,
        dofmap=dofmap,
        locals=tuple(locals_),
        dirichlet_dofs=dirichlet_dofs,
        dirichlet_values=dirichlet_values,
        n_velocity=n_velocity,
        n_pressure=n_pressure,
        pressure_offsets=pressure_offsets,
        diagnostics=tuple(diagnostics),
    )
