"""Thread-capped ordered map.

``WORMKIT_THREADS`` caps the pool size (default 1, i.e. serial).  Results
always come back in input order, so reductions do not depend on scheduling.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

from .errors import ConfigurationError

__all__ = ["thread_count", "ordered_map"]


def thread_count() -> int:
    raw = os.environ.get("WORMKIT_THREADS", "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigurationError(f"WORMKIT_THREADS must be an integer, got {raw!r}") from None
    if n < 1:
        raise ConfigurationError("WORMKIT_THREADS must be >= 1")
    return n


def ordered_map(fn, items) -> list:
    items = list(items)
    n = min(thread_count(), len(items))
    if n <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))
