from typing import Awaitable, TypeVar

from fastapi import APIRouter, Depends, HTTPException

from backend.models import (
    ConstantsRequest,
    ConstantsResponse,
    EvaluateRequest,
    EvaluateResponse,
    GroundStateRequest,
    GroundStateResponse,
    PredictRequest,
    PredictResponse,
)
from backend.repositories import InMemoryRunRepository
from backend.services import ComputationService
from spikelab.errors import NumericalError, PreconditionError
from spikelab.logging_config import get_logger


router = APIRouter(tags=["compute"])

T = TypeVar("T")


async def get_service() -> ComputationService:
    return ComputationService(InMemoryRunRepository.get_instance())


async def _guarded(task: str, call: Awaitable[T]) -> T:
    """PreconditionError -> 422, NumericalError -> 500, both with a JSON detail."""
    log = get_logger("compute")
    try:
        return await call
    except PreconditionError as exc:
        log.info("rejected", task=task, kind=type(exc).__name__)
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    except NumericalError as exc:
        log.error("numerical_failure", task=task, kind=type(exc).__name__)
        raise HTTPException(status_code=500, detail=str(exc)) from exc


@router.post("/ground-state", response_model=GroundStateResponse)
async def ground_state(body: GroundStateRequest, svc: ComputationService = Depends(get_service)):
    return await _guarded("ground-state", svc.ground_state(body))


@router.post("/evaluate", response_model=EvaluateResponse)
async def evaluate(body: EvaluateRequest, svc: ComputationService = Depends(get_service)):
    return await _guarded("evaluate", svc.evaluate(body))


@router.post("/constants", response_model=ConstantsResponse)
async def constants(body: ConstantsRequest, svc: ComputationService = Depends(get_service)):
    return await _guarded("constants", svc.constants(body))


@router.post("/predict", response_model=PredictResponse)
async def predict(body: PredictRequest, svc: ComputationService = Depends(get_service)):
    return await _guarded("predict", svc.predict(body))
