"""Left semiclassical quantization on periodic grids.

``Op^h(a) u(x) = (2 pi)^{-d} int e^{i x xi} a(x, h xi) u_hat(xi) d xi`` is
realised with the DFT: ``u_hat`` is computed once and every output row
``x_j`` sums ``e^{i x_j xi_k} a(x_j, h xi_k) u_hat_k`` over the grid
frequencies. Rows are mapped with `jax.lax.map`.
"""

from dataclasses import dataclass

import jax
import jax.numpy as jnp

from gcckit.enums import QuantizationKind
from gcckit.errors import ConfigurationError
from gcckit.semiclassical.grid import PeriodicGrid, check_band
from gcckit.semiclassical.symbols import Symbol
from gcckit.types import Array, Callable, GridApply, Sequence
from gcckit.util.mv import to_dense
from gcckit.util.ops import batched_map


@dataclass(frozen=True, eq=False)
class GridOperator:
    """A linear operator on grid functions.

    Attributes:
        apply: Grid function (shape ``grid.shape``) to grid function.
        grid: The grid.
        h: Semiclassical parameter.
        kind: Full, tangential or Fourier multiplier.
        name: Label, usually the symbol name.
    """

    apply: GridApply
    grid: PeriodicGrid
    h: float
    kind: QuantizationKind
    name: str = ""

    def __call__(self, u: Array) -> Array:
        return self.apply(jnp.asarray(u))

    def matvec(self, v: Array) -> Array:
        """Action on flattened grid functions."""
        return jnp.ravel(self.apply(jnp.reshape(v, self.grid.shape)))

    def adjoint(self) -> "GridOperator":
        """The adjoint for the grid inner product, by `jax.linear_transpose`."""
        transpose = jax.linear_transpose(self.matvec, jnp.zeros(self.grid.size, dtype=jnp.complex128))

        def apply(u):
            (value,) = transpose(jnp.conj(jnp.ravel(u)).astype(jnp.complex128))
            return jnp.reshape(jnp.conj(value), self.grid.shape)

        return GridOperator(apply, self.grid, self.h, self.kind, f"({self.name})*")

    def to_dense(self, **kwargs) -> Array:
        """The ``(size, size)`` matrix on flattened grid functions."""
        return to_dense(self.matvec, self.grid.size, **kwargs)


def compose(a: GridOperator, b: GridOperator) -> GridOperator:
    """``a o b``."""
    return GridOperator(lambda u: a.apply(b.apply(u)), a.grid, a.h, a.kind, f"{a.name} o {b.name}")


def linear_combination(terms: Sequence[tuple[complex, GridOperator]]) -> GridOperator:
    """``sum_i c_i A_i`` over ``(c_i, A_i)`` pairs sharing a grid."""
    (_, first), *_ = terms

    def apply(u):
        return sum(c * op.apply(u) for c, op in terms)

    name = " + ".join(f"{c}*{op.name}" for c, op in terms)
    return GridOperator(apply, first.grid, first.h, first.kind, name)


def commutator(a: GridOperator, b: GridOperator) -> GridOperator:
    """``[a, b] = a b - b a``."""
    return linear_combination([(1.0, compose(a, b)), (-1.0, compose(b, a))])


# ------------------------------------------------------------------------------
# Quantizations
# ------------------------------------------------------------------------------


def _frequency_shift(grid: PeriodicGrid, frequencies: Array) -> Array:
    # the DFT measures phases from grid.lo
    return jnp.exp(-1j * grid.lo * jnp.sum(frequencies, axis=-1))


def _left_quantization(fn, h: float, grid: PeriodicGrid, batch_size: int | None):
    """Jitted ``(u, param) -> Op^h(fn(param, ., .)) u`` for a symbol family."""
    points = jnp.asarray(grid.points.reshape(-1, grid.dim))
    freqs = jnp.asarray(grid.frequencies.reshape(-1, grid.dim))
    shift = _frequency_shift(grid, freqs)

    @jax.jit
    def apply(u, param):
        u_hat = jnp.ravel(jnp.fft.fftn(jnp.reshape(u, grid.shape))) * shift

        def row(x):
            return jnp.sum(jnp.exp(1j * freqs @ x) * fn(param, x[None, :], h * freqs) * u_hat)

        values = batched_map(row, points, batch_size=batch_size)
        return jnp.reshape(values, grid.shape) / grid.size

    return apply


def quantize(symbol: Symbol, h: float, grid: PeriodicGrid, **kwargs) -> GridOperator:
    """The left quantization ``Op^h(a) = a(x, h D_x)`` on a periodic grid.

    Args:
        symbol: A full symbol (``xi_dim == grid.dim``).
        h: Semiclassical parameter.
        grid: The grid.
        **kwargs: Additional options:
            - quantize_batch_size: Rows per `jax.lax.map` batch.

    Returns:
        The grid operator.

    Raises:
        AliasingError: If the symbol support at scale ``h`` exceeds the grid band;
            the error carries the required grid size.
    """
    if symbol.dim != grid.dim or symbol.xi_dim != grid.dim:
        msg = f"symbol of dimensions ({symbol.dim}, {symbol.xi_dim}) on a {grid.dim}D grid"
        raise ConfigurationError(msg)
    check_band(grid, symbol.xi_radius, h)
    left = _left_quantization(
        lambda _, x, xi: symbol.fn(x, xi), h, grid, kwargs.get("quantize_batch_size")
    )
    return GridOperator(lambda u: left(u, 0.0), grid, h, QuantizationKind.FULL, symbol.name)


def quantize_family(
    fn: Callable[[Array, Array, Array], Array],
    h: float,
    grid: PeriodicGrid,
    xi_radius: float | None = None,
    **kwargs,
) -> Callable[[Array, Array], Array]:
    """``(u, s) -> Op^h(fn(s, ., .)) u`` for a family of symbols indexed by a scalar.

    The parameter is traced, so the whole family compiles once; used for
    time-dependent symbols evaluated along a solution.
    """
    check_band(grid, xi_radius, h)
    return _left_quantization(fn, h, grid, kwargs.get("quantize_batch_size"))


def quantize_samples(values: Array, h: float, grid: PeriodicGrid) -> GridOperator:
    """Left quantization of a sampled 1D symbol ``values[j, k] = a(x_j, h xi_k)``.

    The frequencies are in FFT order (``grid.axis_frequencies``).
    """
    if grid.dim != 1:
        msg = "sampled symbols are supported on 1D grids"
        raise ConfigurationError(msg)
    values = jnp.asarray(values)
    if values.shape != (grid.n, grid.n):
        msg = f"symbol samples of shape {values.shape} on a grid of {grid.n} points"
        raise ConfigurationError(msg)
    freqs = jnp.asarray(grid.axis_frequencies)
    phases = jnp.exp(1j * jnp.outer(jnp.asarray(grid.axis) - grid.lo, freqs))

    @jax.jit
    def apply(u):
        return jnp.sum(phases * values * jnp.fft.fft(u)[None, :], axis=1) / grid.n

    return GridOperator(apply, grid, h, QuantizationKind.FULL, "sampled")


def tangential_quantize(symbol: Symbol, h: float, grid: PeriodicGrid, **kwargs) -> GridOperator:
    """``Op^h(a)`` in the tangential variable ``y`` (axis 0) with ``z`` (axis 1) a parameter.

    The symbol is ``a((y, z), eta')`` with one dual variable.
    """
    if grid.dim != 2 or symbol.dim != 2 or symbol.xi_dim != 1:
        msg = "tangential quantization needs a 2D grid and a symbol a((y, z), eta')"
        raise ConfigurationError(msg)
    check_band(grid, symbol.xi_radius, h)

    ys = jnp.asarray(grid.axis)
    zs = jnp.asarray(grid.axis)
    eta = jnp.asarray(grid.axis_frequencies)[:, None]
    shift = jnp.exp(-1j * grid.lo * eta)
    batch_size = kwargs.get("tangential_quantize_batch_size")

    @jax.jit
    def apply(u):
        u_hat = jnp.fft.fft(u, axis=0) * shift

        def row(y):
            x = jnp.stack([jnp.full_like(zs, y), zs], axis=-1)
            values = symbol.fn(x[None, :, :], h * eta[:, None, :])
            return jnp.sum(jnp.exp(1j * eta * y) * values * u_hat, axis=0)

        return batched_map(row, ys, batch_size=batch_size) / grid.n

    return GridOperator(apply, grid, h, QuantizationKind.TANGENTIAL, symbol.name)


def fourier_multiplier(
    f: Callable[[Array], Array], h: float, grid: PeriodicGrid, axes: Sequence[int] | None = None, **kwargs
) -> GridOperator:
    """``f(h D)`` acting in the given axes (all by default).

    ``f`` maps dual variables of shape ``(..., len(axes))`` to values.
    """
    axes = tuple(range(grid.dim)) if axes is None else tuple(axes)
    freqs = jnp.asarray(grid.frequencies)[..., jnp.asarray(axes)]
    multiplier = f(h * freqs)

    @jax.jit
    def apply(u):
        return jnp.fft.ifftn(multiplier * jnp.fft.fftn(u, axes=axes), axes=axes)

    name = kwargs.get("name", getattr(f, "__name__", "multiplier"))
    return GridOperator(apply, grid, h, QuantizationKind.MULTIPLIER, name)


def multiplication_operator(grid: PeriodicGrid, theta: Callable[[Array], Array], h: float = 1.0) -> GridOperator:
    """Multiplication by ``theta(x)``."""
    values = grid.sample(theta)
    return GridOperator(
        lambda u: values * u, grid, h, QuantizationKind.FULL, getattr(theta, "__name__", "theta")
    )
