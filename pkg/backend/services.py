from __future__ import annotations

import hashlib
import json
import os
import threading
from collections import OrderedDict
from typing import Callable, Tuple, TypeVar

from fastapi.concurrency import run_in_threadpool
from pydantic import BaseModel

from backend.models import (
    ConstantsRequest,
    ConstantsResponse,
    CriticalPoint,
    EvaluateRequest,
    EvaluateResponse,
    GroundStateRequest,
    GroundStateResponse,
    PredictRequest,
    PredictResponse,
    ProblemRequest,
)
from backend.monitoring import CRITICAL_POINTS, TASK_FAILURES, TASKS_TOTAL
from backend.repositories import RunRepository
from spikelab.auxiliary import (
    ProblemData,
    build_problem,
    constants,
    gamma,
    halfspace_mass,
    sigma,
    sigma_bar,
)
from spikelab.config import build_domain
from spikelab.errors import SpikelabError
from spikelab.geometry import project_to_boundary, sample_boundary
from spikelab.groundstate import RadialProfile, profile_summary, solve_ground_state
from spikelab.logging_config import get_logger
from spikelab.predictor import predict_concentration

T = TypeVar("T")

DEFAULT_PROFILE_TOL = 1e-10
DEFAULT_PROFILE_CACHE_SIZE = 32

_profiles: "OrderedDict[Tuple[int, float, float], RadialProfile]" = OrderedDict()
_profiles_lock = threading.Lock()


def profile_tolerance() -> float:
    return float(os.getenv("SPIKELAB_PROFILE_TOL", str(DEFAULT_PROFILE_TOL)))


def profile_cache_size() -> int:
    return max(1, int(os.getenv("SPIKELAB_PROFILE_CACHE_SIZE", str(DEFAULT_PROFILE_CACHE_SIZE))))


def cached_profile(dimension: int, exponent: float, tol: float) -> RadialProfile:
    """Ground states keyed by (N, p, tol), least recently used evicted past the cache size."""
    key = (dimension, exponent, tol)
    with _profiles_lock:
        profile = _profiles.get(key)
        if profile is not None:
            _profiles.move_to_end(key)
            return profile
    profile = solve_ground_state(dimension, exponent, tol)
    limit = profile_cache_size()
    with _profiles_lock:
        profile = _profiles.setdefault(key, profile)
        _profiles.move_to_end(key)
        while len(_profiles) > limit:
            evicted, _ = _profiles.popitem(last=False)
            get_logger("service").debug("profile_evicted", N=evicted[0], p=evicted[1], tol=evicted[2])
    return profile


def request_hash(body: BaseModel) -> str:
    canonical = json.dumps(body.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class ComputationService:
    def __init__(self, repo: RunRepository) -> None:
        self._repo = repo

    async def _run(self, task: str, body: BaseModel, fn: Callable[[], T], summary: Callable[[T], str]) -> T:
        log = get_logger("service")
        TASKS_TOTAL.labels(task=task).inc()
        try:
            result = await run_in_threadpool(fn)
        except SpikelabError as exc:
            TASK_FAILURES.labels(task=task, kind=type(exc).__name__).inc()
            log.warning("task_failed", task=task, kind=type(exc).__name__, message=str(exc))
            raise
        digest = request_hash(body)
        await self._repo.add_run(task, digest, summary(result))
        log.info("task_done", task=task, config_sha256=digest)
        return result

    def _problem(self, req: ProblemRequest) -> ProblemData:
        tol = profile_tolerance()
        return build_problem(
            req.N,
            req.p,
            build_domain(req.domain, req.N),
            req.J,
            req.V,
            tol=tol,
            assumption_samples=req.assumption_samples,
            seed=req.seed,
            profile=cached_profile(req.N, req.p, tol),
        )

    async def ground_state(self, req: GroundStateRequest) -> GroundStateResponse:
        def compute() -> GroundStateResponse:
            profile = cached_profile(req.N, req.p, req.tol or profile_tolerance())
            values = [float(v) for v in profile.eval(req.radii)] if req.radii else []
            return GroundStateResponse(**profile_summary(profile), values=values)

        return await self._run(
            "ground-state", req, compute, lambda r: f"N={r.N} p={r.p:g} u(0)={r.alpha:.10g}"
        )

    async def evaluate(self, req: EvaluateRequest) -> EvaluateResponse:
        def compute() -> EvaluateResponse:
            data = self._problem(req)
            q = project_to_boundary(data.domain, req.point)
            bar = None
            if data.is_boundary_constant("J") and data.is_boundary_constant("V"):
                bar = sigma_bar(data, q)
            return EvaluateResponse(
                Q=q.point.tolist(),
                normal=q.normal.tolist(),
                H=q.mean_curvature,
                gamma=gamma(data, q),
                sigma=sigma(data, q),
                sigma_bar=bar,
            )

        return await self._run(
            "evaluate", req, compute, lambda r: f"gamma={r.gamma:.10g} sigma={r.sigma:.10g}"
        )

    async def constants(self, req: ConstantsRequest) -> ConstantsResponse:
        def compute() -> ConstantsResponse:
            data = self._problem(req)
            if req.point is None:
                q = sample_boundary(data.domain, 1, seed=req.seed)[0]
            else:
                q = project_to_boundary(data.domain, req.point)
            return ConstantsResponse(
                Q=q.point.tolist(),
                constants=constants(data, q).as_dict(),
                gamma=gamma(data, q),
                halfspace_mass=halfspace_mass(data.profile),
            )

        return await self._run(
            "constants", req, compute, lambda r: f"c0={r.constants['c0']:.10g}"
        )

    async def predict(self, req: PredictRequest) -> PredictResponse:
        def compute() -> PredictResponse:
            reports = predict_concentration(
                self._problem(req), seeds=req.seeds, workers=req.workers, seed=req.seed
            )
            for r in reports:
                CRITICAL_POINTS.labels(classification=r.classification.value).inc()
            return PredictResponse(
                function=reports[0].function.value if reports else None,
                reports=[CriticalPoint(**r.as_dict()) for r in reports],
            )

        return await self._run(
            "predict",
            req,
            compute,
            lambda r: f"{r.function} critical points={len(r.reports)} counted={sum(c.counted for c in r.reports)}",
        )
