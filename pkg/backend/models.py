from datetime import datetime
from typing import Dict, List, Optional

from pydantic import BaseModel, Field, PositiveFloat, ValidationInfo, field_validator

from spikelab.config import DomainConfig
from spikelab.groundstate import critical_exponent


class GroundStateRequest(BaseModel):
    N: int = Field(..., ge=1)
    p: float = Field(..., gt=1.0)
    tol: Optional[PositiveFloat] = None
    radii: List[float] = Field(default_factory=list, max_length=1000)


class GroundStateResponse(BaseModel):
    N: int
    p: float
    alpha: float
    c_tail: float
    r_max: float
    tol: float
    grad_sq_integral: float
    mass_integral: float
    power_integral: float
    nehari_residual: float
    pohozaev_residual: float
    values: List[float]


class ProblemRequest(BaseModel):
    N: int = Field(..., ge=1)
    p: float
    domain: Optional[DomainConfig] = None
    J: str = "1"
    V: str = "1"
    assumption_samples: int = Field(10_000, ge=100, le=100_000)
    seed: int = Field(0, ge=0)

    @field_validator("p")
    @classmethod
    def _subcritical(cls, p: float, info: ValidationInfo) -> float:
        n = info.data.get("N")
        if not p > 1.0 or (n is not None and not p < critical_exponent(n)):
            raise ValueError(f"p must satisfy 1 < p < (N+2)/(N-2), got p={p} for N={n}")
        return p


class EvaluateRequest(ProblemRequest):
    point: List[float]


class EvaluateResponse(BaseModel):
    Q: List[float]
    normal: List[float]
    H: float
    gamma: float
    sigma: float
    sigma_bar: Optional[float] = None


class ConstantsRequest(ProblemRequest):
    point: Optional[List[float]] = None


class ConstantsResponse(BaseModel):
    Q: List[float]
    constants: Dict[str, float]
    gamma: float
    halfspace_mass: float


class PredictRequest(ProblemRequest):
    seeds: int = Field(20, ge=1, le=500)
    workers: int = Field(1, ge=1, le=16)


class CriticalPoint(BaseModel):
    Q: List[float]
    normal: List[float]
    H: float
    function: str
    value: float
    gradient_norm: float
    eigenvalues: List[float]
    classification: str
    nondegenerate: bool
    theorems: List[str]
    converged: bool
    iterations: int
    hessian_error: float
    family_size: int
    counted: bool


class PredictResponse(BaseModel):
    function: Optional[str]
    reports: List[CriticalPoint]


class RunRecord(BaseModel):
    task: str
    config_sha256: str
    summary: str
    created_at: datetime


class RunsResponse(BaseModel):
    total: int
    runs: List[RunRecord]


class UsageCount(BaseModel):
    task: str
    count: int


class UsageReportResponse(BaseModel):
    total: int
    counts: List[UsageCount]
