"""Deterministic ordered map over a process pool.

Work functions read their shared state from a module-level registry that
is filled before the pool is created. Worker processes are forked, so
they inherit the registry without pickling it. Results come back in
input order, which keeps every assembled artifact independent of the
number of workers.
"""

from __future__ import annotations

import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, Dict, Iterable, List, Sequence

__all__ = ["ordered_map", "shared"]

_REGISTRY: Dict[str, Any] = {}


def shared(key: str) -> Any:
    return _REGISTRY[key]


def ordered_map(fn: Callable, items: Sequence, workers: int = 1, context: Dict[str, Any] = None, chunksize: int = 0) -> List:
    """``[fn(x) for x in items]``, optionally spread over ``workers`` processes."""
    items = list(items)
    if context:
        _REGISTRY.update(context)
    try:
        if workers <= 1 or len(items) < 2 or "fork" not in multiprocessing.get_all_start_methods():
            return [fn(x) for x in items]
        ctx = multiprocessing.get_context("fork")
        cs = chunksize or max(1, len(items) // (4 * workers))
        with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as ex:
            return list(ex.map(fn, items, chunksize=cs))
    finally:
        if context:
            for k in context:
                _REGISTRY.pop(k, None)
