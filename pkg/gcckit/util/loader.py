"""Utilities for processing sample sets in batches instead of one by one."""

import numpy as np

from gcckit.types import Any, Callable, Iterable, Sequence
from gcckit.util.ops import parallel_map

# ------------------------------------------------------------------------
#  Batching
# ------------------------------------------------------------------------


def chunk(items: Sequence, batch_size: int) -> list[Sequence]:
    """Split a sequence into consecutive batches.

    Args:
        items: The sequence to split.
        batch_size: Maximal batch length.

    Returns:
        The list of batches (the last one may be shorter).

    Raises:
        ValueError: If the batch size is not positive.
    """
    if batch_size <= 0:
        msg = "batch size must be positive"
        raise ValueError(msg)
    return [items[i : i + batch_size] for i in range(0, len(items), batch_size)]


# ------------------------------------------------------------------------
#  Reduction functions
# ------------------------------------------------------------------------


def reduce_concat(res_new: Any, state: Any | None = None) -> tuple[Any, Any]:
    """Concatenate list or array results.

    Args:
        res_new: The new batch result.
        state: The current accumulated state (default: None).

    Returns:
        The updated state and the concatenated result.
    """
    if state is None:
        return res_new, res_new
    if isinstance(state, list):
        new_state = [*state, *res_new]
    else:
        new_state = np.concatenate([state, res_new], axis=0)
    return new_state, new_state


# ------------------------------------------------------------------------
#  Core batch processing logic
# ------------------------------------------------------------------------


def process_batches(
    function: Callable,
    batches: Iterable,
    reduce: Callable = reduce_concat,
    *args,
    jobs: int | None = None,
    **kwargs,
) -> Any:
    """Process batches with a function and fold the results with a reduction.

    The batches are evaluated (possibly concurrently) and reduced in input order,
    so an associative reduction gives the same result for every worker count.

    Args:
        function: A callable that processes a single batch.
        batches: An iterable yielding batches.
        reduce: A callable that reduces results across batches.
        *args: Additional positional arguments for the processing function.
        jobs: Worker count for the batch evaluations.
        **kwargs: Additional keyword arguments for the processing function.

    Returns:
        Any: The final result after processing all batches.

    Raises:
        ValueError: If there are no batches.
    """
    results = parallel_map(
        lambda batch: function(batch, *args, **kwargs), batches, jobs=jobs
    )
    if not results:
        msg = "no batches to process"
        raise ValueError(msg)

    state = None
    result = None
    for res in results:
        result, state = reduce(res, state)
    return result
