import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Optional, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

logger = logging.getLogger(__name__)


def parallel_map(fn: Callable[[T], R], items: Iterable[T], workers: Optional[int] = 1) -> list[R]:
    """Map `fn` over `items` keeping input order.

    Runs in-process when `workers` is None or <= 1; otherwise uses a process pool,
    so `fn` must be a picklable module-level callable.
    """
    items = list(items)
    if not workers or workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    workers = min(workers, len(items))
    logger.debug("Dispatching %d tasks to %d worker processes", len(items), workers)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def argmax_first(values: Sequence) -> int:
    """Index of the largest value, lowest index on ties."""
    best = 0
    for index in range(1, len(values)):
        if values[index] > values[best]:
            best = index
    return best
