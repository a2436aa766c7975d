"""Thread-count resolution and an order-preserving parallel map."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

T = TypeVar("T")
U = TypeVar("U")

ENV_THREADS = "POLYHARM_THREADS"


def resolve_threads(threads: Optional[int] = None) -> int:
    """Explicit value wins, then $POLYHARM_THREADS, then 1. Zero means one per CPU."""
    if threads is None:
        raw = os.environ.get(ENV_THREADS, "").strip()
        threads = int(raw) if raw else 1
    threads = int(threads)
    if threads < 0:
        raise ValueError(f"threads must be >= 0, got {threads}")
    if threads == 0:
        threads = os.cpu_count() or 1
    return threads


def ordered_map(fn: Callable[[T], U], items: Iterable[T], threads: Optional[int] = 1) -> List[U]:
    """``[fn(x) for x in items]``, possibly on a thread pool; result order is input order."""
    items = list(items)
    workers = min(resolve_threads(threads), len(items)) if items else 1
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
