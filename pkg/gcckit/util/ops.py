"""Contains operations for flexible/adaptive compute."""

import os
from concurrent.futures import ThreadPoolExecutor

import jax

from gcckit.types import Any, Array, Callable, Iterable

# -------------------------------------------------------------------------
# Default values
# -------------------------------------------------------------------------

DEFAULT_JOBS = 1
DEFAULT_BATCH_SIZE = None

# -------------------------------------------------------------------------
# Utilities
# -------------------------------------------------------------------------


def resolve_jobs(jobs: int | None) -> int:
    """Turn a user-facing ``--jobs`` value into a worker count.

    Args:
        jobs: Requested worker count:
            - None: Use the default (serial).
            - int <= 0: Use every available CPU.
            - int > 0: Use exactly that many workers.

    Returns:
        int: The number of workers to use.
    """
    if jobs is None:
        return DEFAULT_JOBS
    if jobs <= 0:
        return os.cpu_count() or 1
    return jobs


# -------------------------------------------------------------------------
# Adaptive operations
# -------------------------------------------------------------------------


def batched_map(func: Callable, xs: Array, **kwargs) -> Array:
    """Map a jax function over the leading axis of ``xs`` in batches.

    Args:
        func: Function applied to a single slice.
        xs: Stacked inputs.
        **kwargs: Additional keyword arguments, including:
            - batch_size: Batch size forwarded to `jax.lax.map`.

    Returns:
        The stacked outputs.
    """
    return jax.lax.map(
        func, xs, batch_size=kwargs.get("batch_size", DEFAULT_BATCH_SIZE)
    )


def parallel_map(func: Callable, items: Iterable, jobs: int | None = None) -> list[Any]:
    """Apply ``func`` to every item, optionally on a thread pool.

    The output order always matches the input order, so results do not depend on
    the number of workers.

    Args:
        func: Function applied to each item.
        items: Items to process.
        jobs: Worker count, see `resolve_jobs`.

    Returns:
        list: ``[func(item) for item in items]``.
    """
    items = list(items)
    workers = min(resolve_jobs(jobs), max(len(items), 1))
    if workers <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))
