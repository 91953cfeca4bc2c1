import logging
from typing import Callable, List, Sequence, TypeVar

from joblib import Parallel, delayed

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

# Below this many items a worker pool costs more than it saves
MIN_PARALLEL_ITEMS = 64


def chunked(items: Sequence[T], chunks: int) -> List[Sequence[T]]:
    """Split a sequence into at most `chunks` contiguous, ordered slices."""
    if not items:
        return []
    chunks = max(1, min(chunks, len(items)))
    size, extra = divmod(len(items), chunks)
    slices = []
    start = 0
    for index in range(chunks):
        stop = start + size + (1 if index < extra else 0)
        slices.append(items[start:stop])
        start = stop
    return slices


def ordered_map(
    func: Callable[[Sequence[T]], List[R]], items: Sequence[T], workers: int = 1
) -> List[R]:
    """Apply a chunk function over items and concatenate results in input order.

    Args:
        func: Module-level function taking a slice of items and returning a list
        items: The work items
        workers: joblib worker count; 1 runs in-process

    Returns:
        The concatenated results, identical for every worker count
    """
    if workers <= 1 or len(items) < MIN_PARALLEL_ITEMS:
        return list(func(items))

    slices = chunked(items, workers * 4)
    logger.debug(f"Fanning out {len(items)} items over {workers} workers in {len(slices)} chunks")
    parts = Parallel(n_jobs=workers)(delayed(func)(part) for part in slices)
    results: List[R] = []
    for part in parts:
        results.extend(part)
    return results
