"""Thread-pool helper shared by the estimation modules.

Work items are always independent and carry their own counter-based streams,
so results are identical for any worker count; ``CHAOS_BOUNDS_THREADS`` caps
the pool (default 1, i.e. serial).
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

__all__ = ["worker_count", "pmap"]


def worker_count() -> int:
    raw = os.environ.get("CHAOS_BOUNDS_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def pmap(fn, items) -> list:
    items = list(items)
    workers = worker_count()
    if workers == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
