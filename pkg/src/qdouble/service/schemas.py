"""Request and response models for the experiment service."""

from __future__ import annotations

from typing import Any, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator

from ..state import DEFAULT_SUPPORT_CAP

GroupSpec = Union[str, dict]
SUBCOMMANDS = ("vacuum", "projectors", "ribbon-basis", "braid", "teleport", "logical-qubit",
               "hopf-verify", "all")


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class LatticeSpec(_Strict):
    topology: Literal["plane", "torus"] = "plane"
    width: int = Field(3, ge=2, le=8)
    height: int = Field(3, ge=2, le=8)


class VacuumParams(_Strict):
    group: GroupSpec = "z2"
    tori: Optional[list[str]] = None

    @field_validator("tori")
    @classmethod
    def _sizes(cls, v):
        for t in v or []:
            parts = t.lower().split("x")
            if len(parts) != 2 or not all(p.isdigit() and int(p) >= 2 for p in parts):
                raise ValueError(f"torus size must look like 3x3, got {t!r}")
        return v


class ProjectorParams(_Strict):
    groups: list[GroupSpec] = ["s3", "z4"]
    peter_weyl: list[GroupSpec] = ["s3"]


class RibbonBasisParams(_Strict):
    basis_groups: list[GroupSpec] = ["s3"]
    deformation_groups: list[GroupSpec] = ["z2", "s3"]
    commutation_groups: list[GroupSpec] = ["z3", "s3"]
    multisite_groups: list[GroupSpec] = ["z2"]
    w_algebra_groups: list[GroupSpec] = ["s3"]
    n_states: int = Field(20, ge=1, le=200)
    lattice: Optional[LatticeSpec] = None
    ribbon: Optional[list[tuple[int, int]]] = Field(
        None, description="site chain [vertex, face] for the group-basis check")


class BraidParams(_Strict):
    n: int = Field(3, ge=2, le=12)
    i: int = 1
    j: int = 2
    pairs: Optional[list[tuple[int, int, int]]] = None
    toric_suite: bool = False
    fourier_n: list[int] = [2, 3, 4]
    walkthrough_n: list[int] = [2, 3]


class TeleportParams(_Strict):
    toric_n: list[int] = [3]
    groups: list[GroupSpec] = ["s3"]


class LogicalQubitParams(_Strict):
    n_states: int = Field(20, ge=1, le=200)


class HopfParams(_Strict):
    instance: GroupSpec = "sweedler_4"
    instances: Optional[list[GroupSpec]] = None
    quick: bool = False


class AllParams(_Strict):
    pass


PARAMS = {
    "vacuum": VacuumParams,
    "projectors": ProjectorParams,
    "ribbon-basis": RibbonBasisParams,
    "braid": BraidParams,
    "teleport": TeleportParams,
    "logical-qubit": LogicalQubitParams,
    "hopf-verify": HopfParams,
    "all": AllParams,
}


class ExperimentConfig(_Strict):
    """Everything that determines a run.  Runs are deterministic given this."""

    seed: int = Field(0, ge=0)
    support_cap: int = Field(DEFAULT_SUPPORT_CAP, gt=0)
    tolerance: Optional[float] = Field(None, gt=0, description="override for identity checks")
    params: dict[str, Any] = {}

    def validated_params(self, subcommand: str) -> dict:
        if subcommand not in PARAMS:
            raise ValueError(f"unknown subcommand {subcommand!r}")
        model = PARAMS[subcommand].model_validate(self.params)
        out = model.model_dump(mode="json", exclude_none=True)
        out["seed"] = self.seed
        return out


class CheckRecord(BaseModel):
    name: str
    passed: bool
    max_deviation: float
    support_used: int
    wall_time: float
    tolerance: Optional[float] = None
    details: Optional[dict[str, Any]] = None


class Report(BaseModel):
    subcommand: str
    config: dict[str, Any]
    passed: bool
    checks: list[CheckRecord]
    summary: dict[str, Any] = {}


class ErrorBody(BaseModel):
    error: Literal["config", "budget", "check"]
    detail: str
