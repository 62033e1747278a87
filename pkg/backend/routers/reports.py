from fastapi import APIRouter, Depends

from backend.models import RunRecord, RunsResponse, UsageCount, UsageReportResponse
from backend.repositories import InMemoryRunRepository, RunRepository


router = APIRouter(tags=["reports"])


async def get_repo() -> RunRepository:
    return InMemoryRunRepository.get_instance()


@router.get("/reports/runs", response_model=RunsResponse)
async def runs(repo: RunRepository = Depends(get_repo)):
    items = await repo.runs()
    return RunsResponse(total=len(items), runs=[RunRecord(**it) for it in items])


@router.get("/reports/usage", response_model=UsageReportResponse)
async def usage(repo: RunRepository = Depends(get_repo)):
    counts = await repo.usage_counts()
    total = await repo.total()
    return UsageReportResponse(
        total=total,
        counts=[UsageCount(task=c["task"], count=c["count"]) for c in counts],
    )
