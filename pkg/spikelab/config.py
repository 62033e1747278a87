"""Run configuration loaded from JSON and validated with pydantic."""

from __future__ import annotations

import hashlib
import json
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    PositiveFloat,
    PositiveInt,
    ValidationInfo,
    field_validator,
    model_validator,
)

from spikelab.geometry import DomainSpec, ball, ellipsoid, implicit
from spikelab.groundstate import critical_exponent


class Task(str, Enum):
    GROUND_STATE = "ground-state"
    CONSTANTS = "constants"
    LANDSCAPE = "landscape"
    PREDICT = "predict"
    VERIFY_EXPANSION = "verify-expansion"
    VERIFY_PROPOSITION = "verify-proposition"
    VERIFY_GRADIENT = "verify-gradient"


VERIFY_TASKS = {Task.VERIFY_EXPANSION, Task.VERIFY_PROPOSITION, Task.VERIFY_GRADIENT}


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class BallParams(_Strict):
    center: List[float]
    radius: PositiveFloat = 1.0


class EllipsoidParams(_Strict):
    semi_axes: List[PositiveFloat]
    center: Optional[List[float]] = None


class BallDomain(_Strict):
    ball: BallParams


class EllipsoidDomain(_Strict):
    ellipsoid: EllipsoidParams


class ImplicitDomain(_Strict):
    implicit: str
    bbox: List[List[float]] = Field(..., min_length=2, max_length=2)
    center: Optional[List[float]] = None


DomainConfig = Union[BallDomain, EllipsoidDomain, ImplicitDomain]


class Samples(_Strict):
    boundary: PositiveInt = 10_000
    seeds: PositiveInt = 100
    assumptions: PositiveInt = 100_000
    constancy: PositiveInt = 400


class Tolerances(_Strict):
    ground_state: PositiveFloat = 1e-10
    stationarity: PositiveFloat = 1e-9
    degeneracy: PositiveFloat = 1e-6
    boundary_constancy: PositiveFloat = 1e-8


class Quadrature(_Strict):
    radius: PositiveFloat = 30.0
    depth: PositiveInt = 8


class RunConfig(_Strict):
    N: int = Field(..., ge=1)
    p: float
    task: Task
    domain: Optional[DomainConfig] = None
    J: str = "1"
    V: str = "1"
    point: Optional[List[float]] = None
    function: Literal["auto", "gamma", "sigma", "sigma_bar"] = "auto"
    eps_schedule: List[PositiveFloat] = Field(default_factory=lambda: [0.2, 0.1, 0.05, 0.025])
    include_derivatives: bool = False
    samples: Samples = Field(default_factory=Samples)
    tolerances: Tolerances = Field(default_factory=Tolerances)
    quadrature: Quadrature = Field(default_factory=Quadrature)
    output_dir: str = "out"
    seed: int = Field(0, ge=0, le=2**64 - 1)
    workers: PositiveInt = 1

    @field_validator("p")
    @classmethod
    def _subcritical(cls, p: float, info: ValidationInfo) -> float:
        if not p > 1.0:
            raise ValueError(f"p must satisfy p > 1, got {p}")
        n = info.data.get("N")
        if n is not None and not p < critical_exponent(n):
            raise ValueError(
                f"p must be subcritical: 1 < p < (N+2)/(N-2) = "
                f"{critical_exponent(n):g} for N={n}, got {p}"
            )
        return p

    @field_validator("eps_schedule")
    @classmethod
    def _decreasing(cls, eps: List[float]) -> List[float]:
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise ValueError("eps_schedule must be strictly decreasing")
        return eps

    @model_validator(mode="after")
    def _task_fields(self) -> "RunConfig":
        dims = self._domain_dimensions()
        if any(d != self.N for d in dims):
            raise ValueError(f"domain dimension {dims} does not match N={self.N}")
        if self.point is not None and len(self.point) != self.N:
            raise ValueError(f"point must have N={self.N} coordinates")
        if self.task in VERIFY_TASKS and self.point is None:
            raise ValueError(f"task {self.task.value!r} requires 'point'")
        if self.task is Task.VERIFY_EXPANSION and len(self.eps_schedule) < 3:
            raise ValueError("eps_schedule needs at least 3 values to extrapolate")
        return self

    def _domain_dimensions(self) -> List[int]:
        d = self.domain
        if isinstance(d, BallDomain):
            return [len(d.ball.center)]
        if isinstance(d, EllipsoidDomain):
            dims = [len(d.ellipsoid.semi_axes)]
            if d.ellipsoid.center is not None:
                dims.append(len(d.ellipsoid.center))
            return dims
        if isinstance(d, ImplicitDomain):
            return [len(c) for c in d.bbox]
        return []

    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON of the resolved config, output location excluded."""
        canonical = json.dumps(
            self.model_dump(mode="json", exclude={"output_dir"}),
            sort_keys=True,
            separators=(",", ":"),
        )
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def load_config(
    path: Union[str, Path],
    overrides: Optional[Dict[str, Any]] = None,
    *,
    defaults: Optional[Dict[str, Any]] = None,
) -> RunConfig:
    """Read a JSON config; `overrides` replace keys, `defaults` fill missing ones."""
    raw = json.loads(Path(path).read_text())
    if not isinstance(raw, dict):
        raise ValueError("config file must contain a JSON object")
    for key, value in (defaults or {}).items():
        raw.setdefault(key, value)
    raw.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return RunConfig.model_validate(raw)


def build_domain(d: Optional[DomainConfig], dimension: int) -> DomainSpec:
    """Domain from its config form; the unit ball centred at 0 when absent."""
    if d is None:
        return ball(np.zeros(dimension), 1.0)
    if isinstance(d, BallDomain):
        return ball(d.ball.center, d.ball.radius)
    if isinstance(d, EllipsoidDomain):
        return ellipsoid(d.ellipsoid.semi_axes, d.ellipsoid.center)
    return implicit(d.implicit, d.bbox, d.center)
