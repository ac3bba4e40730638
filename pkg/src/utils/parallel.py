from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from config import get_thread_count

T = TypeVar("T")
R = TypeVar("R")


def resolve_threads(threads: Optional[int] = None) -> int:
    """Explicit thread count, else the PGC_THREADS setting (0 = all cores)."""
    if threads is not None and threads > 0:
        return threads
    return get_thread_count()


def parallel_map(
    func: Callable[[T], R],
    items: Iterable[T],
    threads: Optional[int] = None,
) -> List[R]:
    """
    Apply func to every item, results in input order.

    Runs inline for a single worker so single-threaded runs keep one call
    stack and identical floating-point order.
    """
    items = list(items)
    workers = min(resolve_threads(threads), max(len(items), 1))
    if workers <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(func, items))
