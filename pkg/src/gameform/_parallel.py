import os
from concurrent.futures import ThreadPoolExecutor


def worker_count():
    """Worker cap from ``GAMEFORM_THREADS`` (default 1)."""
    raw = os.environ.get("GAMEFORM_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"GAMEFORM_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"GAMEFORM_THREADS must be a positive integer, got {raw!r}")
    return n


def ordered_map(fn, items):
    """``list(map(fn, items))``, possibly fanned out; results keep input order."""
    items = list(items)
    n = min(worker_count(), len(items))
    if n <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
