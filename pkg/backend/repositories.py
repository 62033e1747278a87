from __future__ import annotations

from datetime import datetime, timezone
from typing import Dict, List, Protocol


class RunRepository(Protocol):
    async def add_run(self, task: str, config_sha256: str, summary: str) -> None: ...
    async def runs(self) -> List[Dict]: ...
    async def usage_counts(self) -> List[Dict[str, int]]: ...
    async def total(self) -> int: ...


# Singleton instance so recorded runs persist across requests
_in_memory_run_repo_instance: "InMemoryRunRepository | None" = None


class InMemoryRunRepository:
    def __init__(self) -> None:
        self._items: List[dict] = []

    @classmethod
    def get_instance(cls) -> "InMemoryRunRepository":
        """Get singleton instance that persists across requests."""
        global _in_memory_run_repo_instance
        if _in_memory_run_repo_instance is None:
            _in_memory_run_repo_instance = cls()
        return _in_memory_run_repo_instance

    async def add_run(self, task: str, config_sha256: str, summary: str) -> None:
        self._items.append({
            "task": task,
            "config_sha256": config_sha256,
            "summary": summary,
            "created_at": datetime.now(timezone.utc),
        })

    async def runs(self) -> List[Dict]:
        return sorted(self._items, key=lambda x: x["created_at"], reverse=True)

    async def usage_counts(self) -> List[Dict[str, int]]:
        counts: Dict[str, int] = {}
        for it in self._items:
            counts[it["task"]] = counts.get(it["task"], 0) + 1
        return [{"task": k, "count": v} for k, v in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))]

    async def total(self) -> int:
        return len(self._items)
