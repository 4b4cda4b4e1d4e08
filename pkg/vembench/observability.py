from __future__ import annotations

from contextlib import contextmanager
import logging
import time
from typing import Iterator

from prometheus_client import Counter, Histogram, generate_latest

RUN_COUNT = Counter(
    "vembench_runs_total",
    "Total benchmark runs",
    ["problem", "formulation", "status"],
)
RUN_DURATION = Histogram(
    "vembench_run_duration_seconds",
    "Benchmark run wall time (seconds)",
    ["problem"],
)
DETECTED_ELL = Histogram(
    "vembench_detected_ell",
    "Augmentation order selected by the rank loop",
    buckets=(1, 2, 3, 4, 5, 6, 8, 10, 15, 20, 25),
)
LOCAL_STIFFNESS_DURATION = Histogram(
    "vembench_local_stiffness_seconds",
    "Local stiffness construction time (seconds)",
    ["kind"],
)
ALLOWED_PROBLEM_LABELS = {"laplace", "elasticity", "stokes"}
ALLOWED_FORMULATION_PREFIXES = ("S", "V", "VC-S", "VC-V", "P0-S")
ALLOWED_STATUS_LABELS = {"ok", "diverged", "error"}

logger = logging.getLogger("vembench.bench")


def metric_problem_label(problem: str | None) -> str:
    normalized = (problem or "").strip().lower()
    if normalized in ALLOWED_PROBLEM_LABELS:
        return normalized
    return "other"


def metric_formulation_label(formulation: str | None) -> str:
    normalized = (formulation or "").strip().upper()
    for prefix in ALLOWED_FORMULATION_PREFIXES:
        tail = normalized[len(prefix):]
        if normalized.startswith(prefix) and tail.isdigit() and len(tail) == 1:
            return normalized
    return "OTHER"


def metric_status_label(status: str | None) -> str:
    normalized = (status or "").strip().lower()
    if normalized in ALLOWED_STATUS_LABELS:
        return normalized
    return "error"


def record_run(*, problem: str, formulation: str, status: str, elapsed_seconds: float) -> None:
    problem_label = metric_problem_label(problem)
    RUN_COUNT.labels(
        problem=problem_label,
        formulation=metric_formulation_label(formulation),
        status=metric_status_label(status),
    ).inc()
    RUN_DURATION.labels(problem=problem_label).observe(max(elapsed_seconds, 0.0))


def record_detected_ell(ell: int) -> None:
    DETECTED_ELL.observe(float(ell))


@contextmanager
def observe_local_stiffness(kind: str) -> Iterator[None]:
    started = time.perf_counter()
    try:
        yield
    finally:
        LOCAL_STIFFNESS_DURATION.labels(kind=kind).observe(time.perf_counter() - started)


def build_run_log_payload(
    *,
    run_id: str,
    mesh: str,
    problem: str,
    formulation: str,
    k: int,
    tau: float | None,
    ell: int | None,
    status: str,
    elapsed_seconds: float,
    err_energy: float | None = None,
) -> dict[str, str | int | float | None]:
    return {
        "run_id": run_id,
        "mesh": mesh,
        "problem": problem,
        "formulation": formulation,
        "k": int(k),
        "tau": tau,
        "ell": ell,
        "err_energy": err_energy,
        "status": status,
        "duration_ms": round(elapsed_seconds * 1000, 2),
    }


def render_metrics() -> bytes:
    return generate_latest()
