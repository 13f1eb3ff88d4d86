"""Matrix-free helpers for linear grid operators."""

import jax
import jax.numpy as jnp

from gcckit.types import Array, Callable, DType


def to_dense(
    mv: Callable[[Array], Array], size: int, dtype: DType = jnp.complex128, **kwargs
) -> Array:
    """Generate a dense matrix from a matrix-vector product function.

    The function is applied to the canonical basis vectors.

    Args:
        mv: A callable implementing the matrix-vector product on flat vectors.
        size: The input dimension.
        dtype: Dtype of the basis vectors.
        **kwargs: Additional options:
            - `to_dense_batch_size`: Batch size for applying the MVP function.

    Returns:
        jax.Array: The dense ``(size, size)`` matrix.
    """
    identity = jnp.eye(size, dtype=dtype)
    return jnp.transpose(
        jax.lax.map(mv, identity, batch_size=kwargs.get("to_dense_batch_size"))
    )  # jax.lax.map stacks along the first axis (rows instead of columns).


def hermitian_defect(matrix: Array) -> Array:
    """Relative size of the anti-Hermitian part of a square matrix."""
    scale = jnp.maximum(jnp.linalg.norm(matrix), jnp.finfo(jnp.float64).tiny)
    return jnp.linalg.norm(matrix - jnp.conj(matrix.T)) / scale
