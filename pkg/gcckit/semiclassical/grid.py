"""Periodic tensor grids for semiclassical operators."""

import functools
import math
from dataclasses import dataclass

import jax.numpy as jnp
import numpy as np

from gcckit.errors import AliasingError, ConfigurationError
from gcckit.types import Array, NDArray

MARGIN_POINTS = 4


def _is_power_of_two(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


@dataclass(frozen=True)
class PeriodicGrid:
    """``n^dim`` points on the box ``[lo, lo + length)^dim`` with periodic ends.

    Grid functions have shape ``(n,) * dim``.
    """

    dim: int
    n: int
    lo: float
    length: float

    @property
    def spacing(self) -> float:
        return self.length / self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def size(self) -> int:
        return self.n**self.dim

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    @property
    def nyquist(self) -> float:
        """Largest angular frequency represented on the grid."""
        return np.pi / self.spacing

    @functools.cached_property
    def axis(self) -> NDArray:
        return self.lo + self.spacing * np.arange(self.n)

    @functools.cached_property
    def axis_frequencies(self) -> NDArray:
        return 2 * np.pi * np.fft.fftfreq(self.n, d=self.spacing)

    @functools.cached_property
    def points(self) -> NDArray:
        """Coordinates, shape ``shape + (dim,)``."""
        return np.stack(np.meshgrid(*([self.axis] * self.dim), indexing="ij"), axis=-1)

    @functools.cached_property
    def frequencies(self) -> NDArray:
        """Angular frequencies in FFT order, shape ``shape + (dim,)``."""
        return np.stack(np.meshgrid(*([self.axis_frequencies] * self.dim), indexing="ij"), axis=-1)

    def sample(self, f) -> Array:
        """Values of a function of points ``(..., dim)`` on the grid."""
        return jnp.asarray(f(jnp.asarray(self.points)))

    def inner(self, u: Array, v: Array) -> Array:
        return jnp.sum(u * jnp.conj(v)) * self.cell_volume

    def norm(self, u: Array) -> Array:
        return jnp.sqrt(jnp.real(self.inner(u, u)))


def create_grid(dim: int, n: int, lo: float = 0.0, hi: float = 2 * np.pi) -> PeriodicGrid:
    """A periodic grid with a power-of-two number of points per axis."""
    if dim not in (1, 2):
        msg = f"grids are 1D or 2D, got dim={dim}"
        raise ConfigurationError(msg)
    if not _is_power_of_two(n):
        msg = f"grid size must be a power of two, got {n}"
        raise ConfigurationError(msg)
    if not hi > lo:
        msg = f"empty grid box [{lo}, {hi})"
        raise ConfigurationError(msg)
    return PeriodicGrid(dim, n, float(lo), float(hi - lo))


def required_size(xi_radius: float, h: float, length: float) -> int:
    """Smallest power of two resolving ``|xi| <= xi_radius / h`` with a margin of
    ``MARGIN_POINTS`` frequency samples below the Nyquist frequency."""
    needed = xi_radius * length / (np.pi * h) + 2 * MARGIN_POINTS
    return 2 ** max(math.ceil(math.log2(max(needed, 2.0))), 1)


def check_band(grid: PeriodicGrid, xi_radius: float | None, h: float) -> None:
    """Raise `AliasingError` unless ``a(x, h xi)`` fits the grid band.

    Args:
        grid: The grid.
        xi_radius: Support radius of the symbol in ``xi`` (None: not checked).
        h: Semiclassical parameter.
    """
    if xi_radius is None:
        return
    n = required_size(xi_radius, h, grid.length)
    if n > grid.n:
        msg = (
            f"symbol support |xi| <= {xi_radius:.4g} at h={h:.4g} aliases on a grid of {grid.n} "
            f"points per axis; at least {n} are required"
        )
        raise AliasingError(msg, required_size=n)


def grid_for_symbol(
    xi_radius: float, h: float, dim: int, lo: float = 0.0, hi: float = 2 * np.pi, *, min_size: int = 16
) -> PeriodicGrid:
    """The smallest admissible grid for a compactly supported symbol at scale ``h``."""
    return create_grid(dim, max(required_size(xi_radius, h, hi - lo), min_size), lo, hi)
