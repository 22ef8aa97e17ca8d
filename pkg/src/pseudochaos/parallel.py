"""Deterministic parallel mapping for Monte-Carlo sweeps.

Work item i writes its result into slot i regardless of which worker ran it,
and callers reduce over the index-ordered list (numpy sums are pairwise), so
estimates are bit-identical for any thread count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def hardware_threads() -> int:
    return os.cpu_count() or 1


def indexed_map(fn, n: int, threads: int = 1) -> list:
    """[fn(0), ..., fn(n-1)], computed with up to ``threads`` workers."""
    if threads is None or threads <= 1 or n <= 1:
        return [fn(i) for i in range(n)]
    results = [None] * n

    def run(i: int) -> None:
        results[i] = fn(i)

    with ThreadPoolExecutor(max_workers=min(threads, n)) as pool:
        list(pool.map(run, range(n)))
    return results
