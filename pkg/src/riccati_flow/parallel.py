"""Order-preserving parallel map over time grids."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

from .config import thread_count


def pmap(fn, items, threads: int | None = None) -> list:
    """``[fn(x) for x in items]``, optionally spread over a thread pool.

    LAPACK calls release the GIL, so threads give real speedups for the
    small dense kernels evaluated per grid point.
    """
    items = list(items)
    threads = thread_count() if threads is None else max(1, threads)
    if threads == 1 or len(items) < 64:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * threads))))
