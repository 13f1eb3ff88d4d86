"""All types defined in one place."""

from collections.abc import Callable, Iterable, Mapping, Sequence  # noqa: F401
from typing import Any  # noqa: F401

import jax
import numpy as np
from jaxtyping import Array, Bool, Complex, Float, Int, Num, PRNGKeyArray  # noqa: F401

# Basic JAX types
KeyType = PRNGKeyArray
DType = jax.typing.DTypeLike
ShapeType = tuple[int, ...]

# Points and covectors
Point = Float[Array, " d"]
Covector = Float[Array, " d"]
PointBatch = Float[Array, "n d"]
StateVector = Float[Array, " 2d+2"]  # (t, x, tau, xi)
TangentVector = Float[Array, " 2d+2"]  # (dt, dx, dtau, dxi)

# Metric oracles
MatrixField = Callable[[Point], Float[Array, "d d"]]
DerivativeField = Callable[[Point], Float[Array, "d d d"]]  # [k, i, j] = d_k g^{ij}
ScalarField = Callable[[Point], Float[Array, ""]]
GradientField = Callable[[Point], Float[Array, " d"]]

# Grid functions
GridFunction = Num[Array, "..."]
ComplexGridFunction = Complex[Array, "..."]
GridApply = Callable[[GridFunction], ComplexGridFunction]

# Symbols: (x, xi) -> complex, broadcasting over leading axes
SymbolFn = Callable[[Float[Array, "... d"], Float[Array, "... d"]], Num[Array, "..."]]

# Numpy side (sparse assembly, meshes, reports)
NDArray = np.ndarray
Report = dict[str, Any]
