"""Phase-space symbols ``a(x, xi)`` and their decay norms."""

import functools
from dataclasses import dataclass

import jax
import jax.numpy as jnp
import numpy as np

from gcckit.errors import ConfigurationError
from gcckit.expressions import phase_symbol
from gcckit.types import Array, Mapping, NDArray, Sequence, SymbolFn


@dataclass(frozen=True, eq=False)
class Symbol:
    """A symbol ``(x, xi) -> a(x, xi)``, broadcasting over leading axes.

    Attributes:
        fn: The symbol; ``x`` has shape ``(..., dim)`` and ``xi`` ``(..., xi_dim)``.
        dim: Spatial dimension.
        xi_dim: Number of dual variables (``dim`` for full symbols, ``dim - 1``
            for tangential ones).
        name: Label for reports.
        decay: Claimed ``(m, n, N)`` such that ``M_{m,n}^{-N}(a)`` is finite.
        xi_radius: ``|xi|`` beyond which the symbol vanishes (None if unbounded).
    """

    fn: SymbolFn
    dim: int
    xi_dim: int
    name: str = ""
    decay: tuple[int, int, int] | None = None
    xi_radius: float | None = None

    def __call__(self, x: Array, xi: Array) -> Array:
        return self.fn(jnp.asarray(x, dtype=float), jnp.asarray(xi, dtype=float))

    def derivative_xi(self, j: int) -> "Symbol":
        """``d a / d xi_j`` by forward-mode differentiation."""
        if not 0 <= j < self.xi_dim:
            msg = f"no dual variable xi{j + 1} in a symbol with {self.xi_dim} dual variables"
            raise ConfigurationError(msg)
        return Symbol(
            _xi_derivative(self.fn, j),
            self.dim,
            self.xi_dim,
            f"d_xi{j + 1}({self.name})",
            None,
            self.xi_radius,
        )


def _xi_derivative(fn: SymbolFn, j: int) -> SymbolFn:
    def derivative(x, xi):
        xi = jnp.asarray(xi, dtype=float)
        tangent = jnp.zeros_like(xi).at[..., j].set(1.0)
        return jax.jvp(lambda e: fn(x, e), (xi,), (tangent,))[1]

    return derivative


def create_symbol(fn: SymbolFn, dim: int, xi_dim: int | None = None, **kwargs) -> Symbol:
    """Wrap a jax function of ``(x, xi)`` as a symbol."""
    return Symbol(
        fn,
        dim,
        dim if xi_dim is None else xi_dim,
        kwargs.get("name", getattr(fn, "__name__", "")),
        kwargs.get("decay"),
        kwargs.get("xi_radius"),
    )


def symbol_from_expression(text: str, dim: int, **kwargs) -> Symbol:
    """Compile an expression in ``x1.., xi1..`` (``I`` allowed) into a symbol."""
    fn = phase_symbol(text, dim, key=kwargs.pop("key", "symbol"))
    return create_symbol(fn, dim, name=kwargs.pop("name", text), **kwargs)


def load_symbol_bank(entries: Mapping[str, str], dim: int) -> dict[str, Symbol]:
    """Named symbols from a mapping ``name -> expression``."""
    return {
        name: symbol_from_expression(text, dim, name=name, key=f"symbols.{name}")
        for name, text in entries.items()
    }


# ------------------------------------------------------------------------------
# Bumps
# ------------------------------------------------------------------------------


def _bump_of_square(s: Array) -> Array:
    clipped = jnp.minimum(s, 1.0 - 1e-12)
    return jnp.where(s < 1.0, jnp.exp(1.0 - 1.0 / (1.0 - clipped)), 0.0)


def smooth_bump(r: Array) -> Array:
    """``exp(1 - 1 / (1 - r^2))`` on ``|r| < 1``, zero outside, with value 1 at 0."""
    return _bump_of_square(jnp.asarray(r) ** 2)


def phase_bump(
    x0: Sequence[float], xi0: Sequence[float], x_radius: float, xi_radius: float, **kwargs
) -> Symbol:
    """Product of smooth bumps centred at ``(x0, xi0)``."""
    x0 = jnp.asarray(x0, dtype=float)
    xi0 = jnp.asarray(xi0, dtype=float)

    def bump(x, xi):
        return _bump_of_square(jnp.sum((x - x0) ** 2, axis=-1) / x_radius**2) * _bump_of_square(
            jnp.sum((xi - xi0) ** 2, axis=-1) / xi_radius**2
        )

    return Symbol(
        bump,
        x0.shape[0],
        xi0.shape[0],
        kwargs.get("name", f"bump({np.asarray(x0).tolist()}, {np.asarray(xi0).tolist()})"),
        (0, x0.shape[0] + 1, x0.shape[0] + 1),
        float(jnp.linalg.norm(xi0)) + xi_radius,
    )


# ------------------------------------------------------------------------------
# Decay norms
# ------------------------------------------------------------------------------


@functools.cache
def _multi_indices(xi_dim: int, order: int) -> tuple[tuple[int, ...], ...]:
    """Sequences of differentiation axes of total order at most ``order``."""
    indices = [()]
    frontier = [()]
    for _ in range(order):
        frontier = [(*seq, j) for seq in frontier for j in range(xi_dim) if not seq or j >= seq[-1]]
        indices.extend(frontier)
    return tuple(indices)


def decay_norm(
    symbol: Symbol, x: NDArray, xi: NDArray, n: int, N: float, *, edge_fraction: float = 0.1
) -> tuple[float, bool]:
    """Sampled ``M_{0,n}^{-N}(a) = max_{|beta| <= n} sup <xi>^N |d_xi^beta a|``.

    Args:
        symbol: The symbol.
        x: Spatial samples ``(p, dim)``.
        xi: Dual samples ``(q, xi_dim)``.
        n: Highest derivative order.
        N: Decay weight exponent.
        edge_fraction: Share of the largest ``|xi|`` samples checked for decay.

    Returns:
        ``(M, decays)`` where ``decays`` is False when the weighted derivatives
        peak on the outer edge of the samples, i.e. the claimed decay is not seen.
    """
    x = jnp.asarray(x, dtype=float)[:, None, :]
    xi = jnp.asarray(xi, dtype=float)[None, :, :]
    weight = (1.0 + jnp.sum(xi**2, axis=-1)) ** (N / 2)
    radius = np.linalg.norm(np.asarray(xi[0]), axis=-1)
    edge = radius >= np.quantile(radius, 1.0 - edge_fraction)

    best, edge_best = 0.0, 0.0
    for seq in _multi_indices(symbol.xi_dim, n):
        fn = symbol.fn
        for j in seq:
            fn = _xi_derivative(fn, j)
        values = np.asarray(jnp.abs(fn(x, xi)) * weight).max(axis=0)
        best = max(best, float(values.max()))
        edge_best = max(edge_best, float(values[edge].max()))
    return best, bool(edge_best < 0.5 * best or best == 0.0)
