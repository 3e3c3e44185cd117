"""Deterministic work distribution.

Every parallel site in the package maps a pure function over a fixed item
list and consumes the results in item order, so the output is identical for
any worker count (including 1).
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def resolve_threads(threads: int | None) -> int:
    """Explicit argument wins, then MINIMAX_MULTINOM_THREADS, then CPU count."""
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get("MINIMAX_MULTINOM_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def ordered_map(fn, items, threads: int | None = None) -> list:
    """Map fn over items, merging results in item order."""
    items = list(items)
    n = resolve_threads(threads)
    if n <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=min(n, len(items))) as pool:
        return list(pool.map(fn, items))
