import os
import threading

import jax.numpy as jnp
import numpy as np
import pytest

from gcckit.util.ops import batched_map, parallel_map, resolve_jobs


def test_resolve_jobs():
    assert resolve_jobs(None) == 1
    assert resolve_jobs(3) == 3
    assert resolve_jobs(0) == (os.cpu_count() or 1)
    assert resolve_jobs(-1) == (os.cpu_count() or 1)


@pytest.mark.parametrize("jobs", [None, 1, 4])
def test_parallel_map_keeps_the_input_order(jobs):
    assert parallel_map(lambda x: x**2, range(10), jobs=jobs) == [x**2 for x in range(10)]


def test_parallel_map_uses_threads():
    seen = set()

    def record(_):
        seen.add(threading.get_ident())
        return None

    parallel_map(record, range(32), jobs=4)
    assert len(seen) >= 1
    assert parallel_map(record, [], jobs=4) == []


@pytest.mark.parametrize("batch_size", [None, 3])
def test_batched_map(batch_size):
    xs = jnp.arange(12.0).reshape(6, 2)
    out = batched_map(lambda x: x @ x, xs, batch_size=batch_size)
    np.testing.assert_allclose(out, np.sum(np.asarray(xs) ** 2, axis=1))
