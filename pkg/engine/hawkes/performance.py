"""
Parallel execution, batching and timing helpers
"""
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from typing import Any, Callable, Iterable, List, Optional, Sequence

import psutil

from .config import get_settings

logger = logging.getLogger(__name__)


# ============================================================================
# WORKERS
# ============================================================================

def resolve_workers(requested: Optional[int] = None) -> int:
    """
    Number of worker processes for a parallel section

    Args:
        requested: Explicit cap; None uses Settings.threads, 0 means all physical cores

    Returns:
        Worker count >= 1
    """
    workers = get_settings().threads if requested is None else requested
    if workers == 0:
        workers = psutil.cpu_count(logical=False) or psutil.cpu_count() or 1
    return max(1, int(workers))


def parallel_map(func: Callable[[Any], Any], items: Iterable[Any], workers: Optional[int] = None) -> List[Any]:
    """
    Ordered map over independent work items

    Results come back in input order whatever the worker count, so callers that
    reduce them sequentially get identical output for any number of workers.
    func must be a module-level callable and items must be picklable.
    """
    items = list(items)
    workers = resolve_workers(workers)
    if workers == 1 or len(items) <= 1:
        return [func(item) for item in items]

    logger.debug(f"Dispatching {len(items)} work items to {min(workers, len(items))} processes")
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as executor:
        return list(executor.map(func, items))


# ============================================================================
# MEMORY OPTIMIZATION
# ============================================================================

def batched(sequence: Sequence[Any], batch_size: int = 1000):
    """
    Generator to process long sequences in batches

    Args:
        sequence: Sequence to split
        batch_size: Size of each batch

    Yields:
        Consecutive slices of the sequence
    """
    for i in range(0, len(sequence), batch_size):
        yield sequence[i:i + batch_size]


def memory_usage_mb() -> float:
    process = psutil.Process(os.getpid())
    return process.memory_info().rss / (1024 * 1024)


# ============================================================================
# TIMING AND MONITORING
# ============================================================================

def log_slow_operation(description: str, execution_time: float, threshold: Optional[float] = None) -> None:
    """
    Log slow numerical operations for performance monitoring

    Args:
        description: Description of the operation
        execution_time: Time taken to execute
        threshold: Threshold for considering an operation slow
    """
    threshold = get_settings().slow_operation_threshold if threshold is None else threshold
    if execution_time > threshold:
        logger.warning(
            f"SLOW OPERATION: {description} took {execution_time:.3f}s "
            f"(threshold: {threshold}s, rss: {memory_usage_mb():.1f} MB)"
        )


@contextmanager
def timed(description: str, threshold: Optional[float] = None):
    start_time = time.perf_counter()
    try:
        yield
    finally:
        execution_time = time.perf_counter() - start_time
        logger.debug(f"{description} finished in {execution_time:.3f}s")
        log_slow_operation(description, execution_time, threshold)
