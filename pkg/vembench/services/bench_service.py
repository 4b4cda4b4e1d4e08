"""Benchmark runs: one (mesh, problem, formulation, k) solve per row, plus the parametric studies."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
import logging
import math
import time
from typing import Callable, Sequence
import uuid

import numpy as np

from vembench.assembly.augmentation import RankConfig
from vembench.assembly.local import LocalStiffness
from vembench.assembly.solver import condition_number, solve
from vembench.assembly.system import AssemblyOptions, assemble, build_local_stiffnesses
from vembench.coefficients import Coefficient, builtin_coefficient
from vembench.config import Config
from vembench.errors import DomainError, VemError
from vembench.mesh.geometry import Mesh
from vembench.observability import build_run_log_payload, record_run
from vembench.ports.repositories import ResultSinkPort
from vembench.projectors.formulations import parse_formulation
from vembench.projectors.problems import ProblemKind, get_problem
from vembench.schemas import BenchResultRow
from vembench.services.manufactured import build_case
from vembench.services.norms import ErrorRecord, error_norms
from vembench.stabilization import TAU_MEAN, tau_mean

logger = logging.getLogger("vembench.bench")

TAU_SWEEP = tuple(10.0**exponent for exponent in range(-10, 11, 2))
VC_COMPARISON = ("S3", "P0-S3", "VC-S3", "VC-V3", "VC-V6")
VC_ELASTICITY_EXTRA = ("VC-V1",)

Tau = float | str


@dataclass(frozen=True)
class RunSpec:
    formulation: str
    k: int
    tau: Tau | None = None
    tol: float | None = None


def _failed_record(kind: ProblemKind) -> ErrorRecord:
    nan = float("nan")
    return ErrorRecord(err_energy=nan, err_l2=nan, err_pressure=nan if kind.is_stokes else None)


def _with_tau(stiffness: LocalStiffness, tau: Tau) -> LocalStiffness:
    value = tau_mean(stiffness.consistency) if tau == TAU_MEAN else float(tau)
    return stiffness.with_tau(value)


def flag_divergence(rows: Sequence[BenchResultRow], factor: float) -> list[BenchResultRow]:
    """Mark rows whose energy error grew past ``factor`` times the k-2 error of the same series."""
    by_series: dict[tuple, dict[int, BenchResultRow]] = {}
    for row in rows:
        key = (row.mesh, row.problem, row.formulation, row.tau, row.tol)
        by_series.setdefault(key, {})[row.k] = row

    flagged = []
    for row in rows:
        diverged = row.diverged or not math.isfinite(row.err_energy)
        previous = by_series[(row.mesh, row.problem, row.formulation, row.tau, row.tol)].get(row.k - 2)
        if previous is not None and math.isfinite(previous.err_energy):
            diverged = diverged or row.err_energy > factor * previous.err_energy
        flagged.append(row if diverged == row.diverged else row.model_copy(update={"diverged": diverged}))
    return flagged


class BenchService:
    def __init__(self, *, config: Config, sink: ResultSinkPort) -> None:
        self._config = config
        self._sink = sink

    def coefficient_for(self, problem: str | ProblemKind, name: str | None) -> Coefficient | None:
        kind = get_problem(problem)
        if kind.is_stokes:
            if name is not None:
                raise DomainError("Stokes runs take no coefficient; use STOKES_VISCOSITY.", details={"coefficient": name})
            return None
        if name is None:
            if kind.name == "elasticity":
                name = "elastic-iso"
            else:
                return None
        return builtin_coefficient(name, young=self._config.YOUNG_MODULUS, poisson=self._config.POISSON_RATIO)

    def _options(self, problem: str, *, tau: Tau | None = None, tol: float | None = None, nested: bool = False):
        rank = None
        if tol is not None:
            rank = RankConfig(multiplier=tol, ell_max=self._config.ELL_MAX)
        options = AssemblyOptions.from_config(self._config, problem, tau=tau, rank=rank)
        if nested:
            options = replace(options, workers=1)
        return options

    def run_case(
        self,
        mesh: Mesh,
        problem: str,
        formulation: str,
        k: int,
        *,
        tau: Tau | None = None,
        tol: float | None = None,
        coefficient: str | None = None,
        case: str = "sin",
        locals_: list[LocalStiffness] | None = None,
        nested: bool = False,
    ) -> BenchResultRow:
        kind = get_problem(problem)
        parsed = parse_formulation(formulation, kind)
        run_id = uuid.uuid4().hex
        started = time.perf_counter()
        options = self._options(kind.name, tau=tau, tol=tol, nested=nested)
        record = _failed_record(kind)
        cond = float("nan")
        l_max = 0
        status = "ok"
        try:
            field_coefficient = self.coefficient_for(kind, coefficient)
            manufactured = build_case(case, kind, k, field_coefficient, viscosity=options.viscosity)
            system = assemble(
                mesh,
                kind,
                parsed,
                k,
                manufactured,
                coefficient=field_coefficient,
                options=options,
                locals_=locals_,
            )
            l_max = system.l_max
            solution = solve(system)
            record = error_norms(system, solution, manufactured)
            cond = condition_number(system)
        except (VemError, np.linalg.LinAlgError, FloatingPointError):
            status = "error"
            logger.exception(
                "bench run failed",
                extra={"run_id": run_id, "mesh": mesh.name, "problem": kind.name, "formulation": parsed.name, "k": k},
            )
        elapsed = time.perf_counter() - started
        diverged = status == "error" or not record.is_finite
        if diverged and status == "ok":
            status = "diverged"

        row = BenchResultRow(
            mesh=mesh.name,
            problem=kind.name,
            formulation=parsed.name,
            k=k,
            tau=(tau if tau is not None else options.tau) if parsed.is_stabilized else None,
            tol=(tol if tol is not None else options.rank.multiplier) if parsed.is_self_stabilized else None,
            l_max=l_max,
            err_energy=record.err_energy,
            err_l2=record.err_l2,
            err_pressure=record.err_pressure,
            cond=cond,
            diverged=diverged,
            seconds=elapsed,
        )
        self._log_row(row, run_id=run_id, status=status, elapsed=elapsed)
        return row

    def _log_row(self, row: BenchResultRow, *, run_id: str, status: str, elapsed: float) -> None:
        if self._config.METRICS_ENABLED:
            record_run(problem=row.problem, formulation=row.formulation, status=status, elapsed_seconds=elapsed)
        payload = build_run_log_payload(
            run_id=run_id,
            mesh=row.mesh,
            problem=row.problem,
            formulation=row.formulation,
            k=row.k,
            tau=row.tau if isinstance(row.tau, float) else None,
            ell=row.l_max,
            err_energy=row.err_energy,
            status=status,
            elapsed_seconds=elapsed,
        )
        if status == "diverged":
            logger.warning("bench run diverged", extra=payload)
        elif status == "ok":
            logger.info("bench run", extra=payload)

    def _run_all(self, tasks: Sequence[Callable[[], BenchResultRow]]) -> list[BenchResultRow]:
        workers = max(int(self._config.BENCH_WORKERS), 1)
        if workers > 1 and len(tasks) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                rows = list(pool.map(lambda task: task(), tasks))
        else:
            rows = [task() for task in tasks]
        rows = flag_divergence(rows, float(self._config.DIVERGENCE_FACTOR))
        for row in rows:
            if row.diverged:
                logger.warning(
                    "diverged row",
                    extra={"mesh": row.mesh, "problem": row.problem, "formulation": row.formulation, "k": row.k},
                )
        self._sink.extend(rows)
        return rows

    def run(
        self,
        mesh: Mesh,
        problem: str,
        specs: Sequence[RunSpec],
        *,
        coefficient: str | None = None,
        case: str = "sin",
    ) -> list[BenchResultRow]:
        nested = int(self._config.BENCH_WORKERS) > 1
        tasks = [
            lambda spec=spec: self.run_case(
                mesh,
                problem,
                spec.formulation,
                spec.k,
                tau=spec.tau,
                tol=spec.tol,
                coefficient=coefficient,
                case=case,
                nested=nested,
            )
            for spec in specs
        ]
        return self._run_all(tasks)

    def sweep_tau(
        self,
        mesh: Mesh,
        problem: str,
        formulation: str,
        degrees: Sequence[int],
        taus: Sequence[Tau] = (*TAU_SWEEP, TAU_MEAN),
        *,
        coefficient: str | None = None,
        case: str = "sin",
    ) -> list[BenchResultRow]:
        """Full (k, tau) grid; the local matrices are built once per k and rescaled per tau."""
        kind = get_problem(problem)
        parsed = parse_formulation(formulation, kind)
        if not parsed.is_stabilized:
            raise DomainError(f"tau sweeps need a stabilized formulation, got {parsed.name}.")
        nested = int(self._config.BENCH_WORKERS) > 1

        def sweep(k: int) -> list[BenchResultRow]:
            try:
                locals_, _ = build_local_stiffnesses(
                    mesh,
                    kind,
                    parsed,
                    k,
                    self.coefficient_for(kind, coefficient),
                    self._options(kind.name, tau=1.0, nested=nested),
                )
            except (VemError, np.linalg.LinAlgError):
                logger.exception("local stiffness failed", extra={"mesh": mesh.name, "problem": kind.name, "k": k})
                locals_ = None
            rows = []
            for tau in taus:
                scaled = None if locals_ is None else [_with_tau(stiffness, tau) for stiffness in locals_]
                rows.append(
                    self.run_case(
                        mesh,
                        kind.name,
                        parsed.name,
                        k,
                        tau=tau,
                        coefficient=coefficient,
                        case=case,
                        locals_=scaled,
                        nested=nested,
                    )
                )
            return rows

        per_k = [lambda k=k: sweep(k) for k in degrees]
        workers = max(int(self._config.BENCH_WORKERS), 1)
        if workers > 1 and len(per_k) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                grouped = list(pool.map(lambda task: task(), per_k))
        else:
            grouped = [task() for task in per_k]
        rows = [row for group in grouped for row in group]
        return self._run_all([lambda row=row: row for row in rows])

    def sweep_tol(
        self,
        mesh: Mesh,
        problem: str,
        formulation: str,
        degrees: Sequence[int],
        multipliers: Sequence[float],
        *,
        coefficient: str | None = None,
        case: str = "sin",
    ) -> list[BenchResultRow]:
        parsed = parse_formulation(formulation, get_problem(problem))
        if not parsed.is_self_stabilized:
            raise DomainError(f"tolerance sweeps need a self-stabilized formulation, got {parsed.name}.")
        specs = [RunSpec(parsed.name, k, tol=multiplier) for k in degrees for multiplier in multipliers]
        return self.run(mesh, problem, specs, coefficient=coefficient, case=case)

    def compare_formulations(
        self,
        mesh: Mesh,
        problem: str,
        formulations: Sequence[str],
        degrees: Sequence[int],
        *,
        tau: Tau | None = None,
        coefficient: str | None = None,
        case: str = "sin",
    ) -> list[BenchResultRow]:
        kind = get_problem(problem)
        specs = []
        for name in formulations:
            parsed = parse_formulation(name, kind)
            for k in degrees:
                specs.append(RunSpec(parsed.name, k, tau=tau if parsed.is_stabilized else None))
        return self.run(mesh, problem, specs, coefficient=coefficient, case=case)

    def compare_vc(
        self,
        mesh: Mesh,
        problem: str,
        degrees: Sequence[int],
        coefficient: str,
        *,
        tau: Tau | None = None,
        case: str = "sin",
    ) -> list[BenchResultRow]:
        """Standard Pi-nabla and Pi0-gradient forms against the variable-coefficient variants."""
        kind = get_problem(problem)
        if kind.is_stokes:
            raise DomainError("compare-vc needs a problem with a coefficient field.")
        formulations = VC_COMPARISON + (VC_ELASTICITY_EXTRA if kind.name == "elasticity" else ())
        return self.compare_formulations(
            mesh, kind.name, formulations, degrees, tau=tau, coefficient=coefficient, case=case
        )
