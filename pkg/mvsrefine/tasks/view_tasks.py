"""Per-view pipeline stages run on a thread pool.

Results always come back in input order, so nothing downstream depends on
the worker count.
"""
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Sequence, TypeVar

import structlog

from ..config import get_settings

logger = structlog.get_logger()

T = TypeVar("T")
R = TypeVar("R")


def run_per_view(task: Callable[[T], R], items: Sequence[T], workers: int = None) -> List[R]:
    workers = workers or get_settings().workers
    if workers <= 1 or len(items) <= 1:
        return [task(item) for item in items]
    logger.debug("Dispatching per-view tasks.", tasks=len(items), workers=workers)
    with ThreadPoolExecutor(max_workers=workers, thread_name_prefix="view") as pool:
        return list(pool.map(task, items))
