"""Formulation names: S1..S5, V1..V6, VC-S1..VC-S5, VC-V{1,3,4,6} and P0-S1..P0-S5."""

from __future__ import annotations

from dataclasses import dataclass
import re
import sys

if sys.version_info >= (3, 11):
    from enum import StrEnum
else:
    from enum import Enum

    class StrEnum(str, Enum):
        def __str__(self) -> str:
            return str(self.value)

        def __format__(self, format_spec: str) -> str:
            return str(self.value).__format__(format_spec)

from vembench.errors import FormulationError
from vembench.projectors.problems import ProblemKind


class Family(StrEnum):
    STABILIZED = "S"
    SELF_STABILIZED = "V"
    VC_STABILIZED = "VC-S"
    VC_SELF_STABILIZED = "VC-V"
    P0_STABILIZED = "P0-S"


class SpaceKind(StrEnum):
    STANDARD = "standard"
    ENLARGED = "enlarged"
    AUGMENTED = "augmented"


_PATTERN = re.compile(r"^(VC-S|VC-V|P0-S|S|V)([1-6])$")
_VERSION_LIMITS = {
    Family.STABILIZED: 5,
    Family.P0_STABILIZED: 5,
    Family.VC_STABILIZED: 5,
    Family.SELF_STABILIZED: 6,
    Family.VC_SELF_STABILIZED: 6,
}
VC_UNSUPPORTED_VERSIONS = frozenset({2, 5})


@dataclass(frozen=True)
class Formulation:
    family: Family
    version: int

    @property
    def name(self) -> str:
        return f"{self.family.value}{self.version}"

    def __str__(self) -> str:
        return self.name

    @property
    def is_stabilized(self) -> bool:
        return self.family in (Family.STABILIZED, Family.VC_STABILIZED, Family.P0_STABILIZED)

    @property
    def is_self_stabilized(self) -> bool:
        return not self.is_stabilized

    @property
    def is_vc(self) -> bool:
        return self.family in (Family.VC_STABILIZED, Family.VC_SELF_STABILIZED)

    @property
    def stabilization(self) -> str | None:
        return f"S{self.version}" if self.is_stabilized else None

    @property
    def projects_gradient(self) -> bool:
        """V1-V3 (and VC/P0 analogues) project the strain in L2; V4-V6 are energy projections."""
        if self.family is Family.P0_STABILIZED:
            return True
        return self.is_self_stabilized and self.version in (1, 2, 3)

    def space_kind(self, problem: ProblemKind) -> SpaceKind:
        if self.is_stabilized:
            return SpaceKind.STANDARD
        if self.version in (1, 4):
            return SpaceKind.ENLARGED
        if self.version in (2, 5):
            return SpaceKind.AUGMENTED
        # V3/V6: the perp block needs higher moments unless it is divergence free
        return SpaceKind.STANDARD if problem.perp_is_divergence_free else SpaceKind.ENLARGED


def parse_formulation(name: str | Formulation, problem: ProblemKind | None = None) -> Formulation:
    if isinstance(name, Formulation):
        formulation = name
    else:
        match = _PATTERN.match((name or "").strip().upper())
        if match is None:
            raise FormulationError(
                f"Unknown formulation: {name}",
                details={"expected": "S1..S5, V1..V6, VC-S1..VC-S5, VC-V1/3/4/6, P0-S1..P0-S5"},
            )
        family = Family(match.group(1))
        version = int(match.group(2))
        if version > _VERSION_LIMITS[family]:
            raise FormulationError(f"Unknown formulation: {name}", details={"family": family.value})
        formulation = Formulation(family=family, version=version)

    if formulation.family is Family.VC_SELF_STABILIZED and formulation.version in VC_UNSUPPORTED_VERSIONS:
        raise FormulationError(
            f"{formulation.name} is not defined: variable-coefficient projectors do not apply to V2 and V5.",
            details={"formulation": formulation.name},
        )
    if problem is not None and problem.is_stokes and formulation.is_vc:
        raise FormulationError(
            f"{formulation.name} is not defined for the Stokes problem.",
            details={"formulation": formulation.name, "problem": problem.name},
        )
    return formulation
