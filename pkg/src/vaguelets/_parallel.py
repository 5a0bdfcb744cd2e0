"""Ordered thread-pool map with a fixed work partition."""

import os
from concurrent.futures import ThreadPoolExecutor


def resolve_threads(threads: int) -> int:
    if threads is None or threads <= 0:
        return os.cpu_count() or 1
    return int(threads)


def ordered_map(fn, items, threads=1):
    """``[fn(item) for item in items]``, optionally on a thread pool.

    The partition of work is given by ``items`` and never depends on the
    thread count, so callers that reduce the results in list order get
    identical output for any ``threads``.
    """
    items = list(items)
    n = resolve_threads(threads)
    if n == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(n, len(items))) as pool:
        return list(pool.map(fn, items))
