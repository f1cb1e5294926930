"""Thread fan-out for independent trajectories.

The compiled integrator releases the GIL, so threads run cells
concurrently.  Results are gathered by index, which keeps the output
independent of scheduling.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def default_threads() -> int:
    try:
        return max(1, len(os.sched_getaffinity(0)))
    except AttributeError:
        return max(1, os.cpu_count() or 1)


def parallel_map(fn, items, threads: int | None = None) -> list:
    """``[fn(item) for item in items]``, optionally on a thread pool."""
    items = list(items)
    threads = default_threads() if threads is None else int(threads)
    if threads < 1:
        raise ValueError("threads must be >= 1")
    if threads == 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))
