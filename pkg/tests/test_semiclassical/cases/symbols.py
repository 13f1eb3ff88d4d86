"""Symbols with closed-form kernels or quantizations."""

import jax.numpy as jnp
import numpy as np

from gcckit.semiclassical import create_symbol


def _shape(x, xi):
    return jnp.broadcast_shapes(jnp.shape(x)[:-1], jnp.shape(xi)[:-1])


def case_identity(dim=1):
    return create_symbol(lambda x, xi: jnp.ones(_shape(x, xi)), dim, name="one", xi_radius=None)


def chi(x):
    return 1.0 + 0.5 * jnp.cos(x[..., 0])


def case_gaussian():
    # k_a(x, v) = chi(x) (2 pi)^{-1/2} exp(-v^2 / 2)
    def gaussian(x, xi):
        return chi(x) * jnp.exp(-0.5 * xi[..., 0] ** 2)

    return create_symbol(gaussian, 1, decay=(0, 2, 2))


def case_position_times_momentum():
    return create_symbol(lambda x, xi: x[..., 0] * xi[..., 0], 1, name="x xi")


def random_symbols(n, seed=0):
    """Smooth symbols ``(c0 + c1 cos(x + phi)) exp(-(xi - s)^2 / (2 w^2))``."""
    rng = np.random.default_rng(seed)
    symbols = []
    for i in range(n):
        c0, c1 = rng.uniform(-1.0, 1.0, size=2)
        phi, s = rng.uniform(0.0, 2 * np.pi), rng.uniform(-1.0, 1.0)
        w = rng.uniform(0.5, 1.5)

        def symbol(x, xi, c0=c0, c1=c1, phi=phi, s=s, w=w):
            return (c0 + c1 * jnp.cos(x[..., 0] + phi)) * jnp.exp(-((xi[..., 0] - s) ** 2) / (2 * w**2))

        symbols.append(create_symbol(symbol, 1, name=f"random{i}", decay=(0, 2, 2)))
    return symbols
