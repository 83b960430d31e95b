"""Walk-level parallelism.  Results come back in walk order, so every aggregate is
independent of the thread count."""
import os
from concurrent.futures import ThreadPoolExecutor

__all__ = ["THREADS_ENV", "default_threads", "map_walks"]

THREADS_ENV = "ELLIPTICWALK_THREADS"


def default_threads():
    try:
        n = int(os.environ.get(THREADS_ENV, "1"))
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be an integer") from None
    return max(1, n)


def map_walks(fn, n_walks, threads=None):
    """``[fn(0), ..., fn(n_walks - 1)]``, evaluated on up to ``threads`` threads."""
    threads = default_threads() if threads is None else max(1, int(threads))
    if threads == 1 or n_walks <= 1:
        return [fn(w) for w in range(n_walks)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(n_walks)))
