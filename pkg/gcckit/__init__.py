"""Geometric control conditions and semiclassical measures for rough wave equations."""

import jax

# Chart tolerances, shell projections and Gram eigenvalues are all below float32
# resolution.
jax.config.update("jax_enable_x64", True)

__version__ = "0.1.0"
