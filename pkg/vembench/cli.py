from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

from pydantic import ValidationError

from vembench import create_runtime
from vembench.config import Config
from vembench.errors import DomainError, VemError, build_error_payload
from vembench.mesh.builtin import BUILTIN_MESHES
from vembench.mesh.geometry import Mesh
from vembench.mesh.validation import validate_mesh
from vembench.observability import render_metrics
from vembench.ports.dto import ElementSummaryDTO
from vembench.ports.repositories import MeshRepositoryPort
from vembench.projectors.problems import PROBLEMS, get_problem
from vembench.repositories.mesh_repository import JsonMeshRepository
from vembench.repositories.results_repository import CsvResultCollector
from vembench.schemas import BenchRequest
from vembench.services.bench_service import TAU_SWEEP, BenchService, RunSpec
from vembench.services.manufactured import CASES
from vembench.stabilization import TAU_MEAN

logger = logging.getLogger("vembench.cli")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_DIVERGED = 2

DEFAULT_K_MAX = 10
DEFAULT_FORMULATIONS = {
    "run": ["S3"],
    "sweep-tau": ["S1"],
    "sweep-tol": ["V3"],
    "compare": ["S1", "S2", "S3", "S4", "S5", "V1", "V2", "V3", "V4", "V5", "V6"],
}


def parse_degrees(value: str) -> tuple[int, int]:
    """``"3"`` or ``"2..8"``."""
    text = value.strip()
    try:
        if ".." in text:
            low, high = (int(part) for part in text.split("..", 1))
        else:
            low = high = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected K or A..B, got {value!r}") from None
    if low < 1 or high < low:
        raise argparse.ArgumentTypeError(f"invalid degree range {value!r}")
    return low, high


def parse_taus(value: str) -> list[float | str]:
    taus: list[float | str] = []
    for part in value.split(","):
        part = part.strip().lower()
        if not part:
            continue
        if part == TAU_MEAN:
            taus.append(TAU_MEAN)
            continue
        try:
            taus.append(float(part))
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected numbers or 'mean', got {part!r}") from None
    return taus


def parse_floats(value: str) -> list[float]:
    try:
        return [float(part) for part in value.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got {value!r}") from None


def _add_bench_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--mesh", default="quad", help=f"Built-in mesh ({', '.join(BUILTIN_MESHES)}) or a mesh JSON path.")
    parser.add_argument("--problem", choices=sorted(PROBLEMS), default="laplace")
    parser.add_argument("--formulation", default=None, help="Comma-separated formulation names, e.g. S3,V3,VC-V6.")
    parser.add_argument("--k", type=parse_degrees, default=None, help="Degree or range A..B.")
    parser.add_argument("--tau", type=parse_taus, default=None, help="Comma-separated tau values or 'mean'.")
    parser.add_argument("--tol-mult", type=parse_floats, default=None, help="Comma-separated rank tolerance multipliers.")
    parser.add_argument("--coefficient", default=None, help="Built-in coefficient name.")
    parser.add_argument("--case", choices=list(CASES), default="sin", help="Manufactured solution.")
    parser.add_argument("--out", default=None, help="CSV output path; stdout when omitted.")
    parser.add_argument("--metrics-out", default=None, help="Write the metrics exposition text to this path.")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vembench", description="p-version virtual element benchmarks.")
    commands = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("run", "Run formulations over a degree range."),
        ("sweep-tau", "Sweep the stabilization parameter."),
        ("sweep-tol", "Sweep the rank tolerance multiplier."),
        ("compare", "Compare formulations."),
        ("compare-vc", "Compare standard and variable-coefficient formulations."),
    ):
        _add_bench_arguments(commands.add_parser(name, help=text))

    mesh = commands.add_parser("mesh", help="Mesh utilities.")
    mesh_commands = mesh.add_subparsers(dest="mesh_command", required=True)
    for name in ("validate", "show"):
        sub = mesh_commands.add_parser(name)
        sub.add_argument("mesh", help="Built-in mesh name or mesh JSON path.")
    return parser


def _request(args: argparse.Namespace) -> BenchRequest:
    problem = get_problem(args.problem)
    default_low = problem.min_degree
    low, high = args.k or (default_low, DEFAULT_K_MAX)
    formulations = args.formulation.split(",") if args.formulation else DEFAULT_FORMULATIONS.get(args.command, ["S3"])
    taus = args.tau or []
    if args.command == "sweep-tau" and not taus:
        taus = [*TAU_SWEEP, TAU_MEAN]
    multipliers = args.tol_mult or []
    if args.command == "sweep-tol" and not multipliers:
        multipliers = [1.0, 10.0, 100.0, 1000.0]
    try:
        return BenchRequest(
            mesh=args.mesh,
            problem=problem.name,
            formulations=[name.strip() for name in formulations if name.strip()],
            k_min=low,
            k_max=high,
            taus=taus,
            tol_multipliers=multipliers,
            coefficient=args.coefficient,
            case=args.case,
        )
    except ValidationError as exc:
        raise DomainError(
            "Invalid benchmark request.",
            details=[{"loc": list(error["loc"]), "msg": error["msg"]} for error in exc.errors()],
        ) from exc


def mesh_repository(config: Config) -> MeshRepositoryPort:
    return JsonMeshRepository(merge_tol=config.MESH_MERGE_TOL)


def _bench(args: argparse.Namespace, config: Config) -> int:
    request = _request(args)
    mesh = mesh_repository(config).resolve(request.mesh)
    collector = CsvResultCollector()
    service = BenchService(config=config, sink=collector)
    degrees = request.degrees
    options = {"coefficient": request.coefficient, "case": request.case}

    if args.command == "run":
        taus = request.taus or [None]
        tols = request.tol_multipliers or [None]
        specs = [
            RunSpec(name, k, tau=tau, tol=tol)
            for name in request.formulations
            for k in degrees
            for tau in taus
            for tol in tols
        ]
        service.run(mesh, request.problem, specs, **options)
    elif args.command == "sweep-tau":
        for name in request.formulations:
            service.sweep_tau(mesh, request.problem, name, degrees, request.taus, **options)
    elif args.command == "sweep-tol":
        for name in request.formulations:
            service.sweep_tol(mesh, request.problem, name, degrees, request.tol_multipliers, **options)
    elif args.command == "compare":
        tau = request.taus[0] if request.taus else None
        service.compare_formulations(mesh, request.problem, request.formulations, degrees, tau=tau, **options)
    else:
        if request.coefficient is None:
            raise DomainError("compare-vc needs --coefficient.")
        tau = request.taus[0] if request.taus else None
        service.compare_vc(mesh, request.problem, degrees, request.coefficient, tau=tau, case=request.case)

    if args.out:
        collector.write(args.out)
    else:
        sys.stdout.write(collector.render())
    if args.metrics_out:
        Path(args.metrics_out).write_bytes(render_metrics())
    return EXIT_DIVERGED if collector.any_diverged else EXIT_OK


def element_summaries(mesh: Mesh) -> list[ElementSummaryDTO]:
    return [
        {
            "element": element.index,
            "n_vertices": len(element.edges),
            "area": float(element.area),
            "centroid": (float(element.centroid[0]), float(element.centroid[1])),
            "diameter": float(element.diameter),
            "curved_edges": sum(1 for edge in element.edges if edge.is_curved),
        }
        for element in mesh.elements
    ]


def _mesh(args: argparse.Namespace, config: Config) -> int:
    repository = mesh_repository(config)
    if args.mesh_command == "validate":
        mesh = repository.resolve(args.mesh, validate=False)
        report = validate_mesh(mesh)
        print(json.dumps({"mesh": mesh.name, "ok": report.ok, "issues": report.issues, "warnings": report.warnings}))
        return EXIT_OK if report.ok else EXIT_ERROR
    mesh = repository.resolve(args.mesh)
    print(
        json.dumps(
            {
                "mesh": mesh.name,
                "n_vertices": mesh.n_vertices,
                "n_elements": mesh.n_elements,
                "total_area": mesh.total_area,
                "elements": element_summaries(mesh),
            },
            indent=2,
        )
    )
    return EXIT_OK


def main(argv: Sequence[str] | None = None, *, config: Config | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = create_runtime(config)
    except RuntimeError as exc:
        print(json.dumps(build_error_payload(code="CONFIG_ERROR", message=str(exc))), file=sys.stderr)
        return EXIT_ERROR
    try:
        if args.command == "mesh":
            return _mesh(args, config)
        return _bench(args, config)
    except VemError as exc:
        logger.debug("command failed", extra={"status": "error"})
        print(json.dumps(exc.to_payload()), file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
