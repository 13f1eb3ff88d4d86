import jax
import jax.numpy as jnp
import numpy as np
import pytest

from gcckit.util.mv import hermitian_defect, to_dense


@pytest.mark.parametrize("n", [2, 5])
@pytest.mark.parametrize("batch_size", [None, 2])
def test_to_dense_recovers_the_matrix(n, batch_size):
    key_re, key_im = jax.random.split(jax.random.key(42))
    A = jax.random.normal(key_re, (n, n)) + 1j * jax.random.normal(key_im, (n, n))

    def mv(x):
        return A @ x

    dense = to_dense(mv, n, to_dense_batch_size=batch_size)
    np.testing.assert_allclose(dense, A, atol=1e-12)


def test_to_dense_of_a_real_operator():
    A = jnp.arange(9.0).reshape(3, 3)
    dense = to_dense(lambda x: A @ x, 3, dtype=jnp.float64)
    assert dense.dtype == jnp.float64
    np.testing.assert_allclose(dense, A)


def test_hermitian_defect():
    H = jnp.array([[1.0, -2j], [2j, 4.0]])
    assert float(hermitian_defect(H)) == 0.0
    S = jnp.array([[0.0, 1.0], [-1.0, 0.0]])
    np.testing.assert_allclose(float(hermitian_defect(S)), 2.0)
    assert float(hermitian_defect(jnp.zeros((2, 2)))) == 0.0
