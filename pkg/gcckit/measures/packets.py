"""Coherent wave packets, ladder samples and the leak-at-infinity diagnostic."""

import functools
import math
from dataclasses import dataclass

import jax.numpy as jnp
import numpy as np
import scipy.integrate
from loguru import logger

from gcckit.errors import AliasingError, ConfigurationError
from gcckit.semiclassical.grid import PeriodicGrid, required_size
from gcckit.semiclassical.quantize import fourier_multiplier
from gcckit.spectral.assemble import EigenBasis
from gcckit.types import Array, Callable, NDArray, Report, Sequence

# ------------------------------------------------------------------------------
# Default values
# ------------------------------------------------------------------------------

DEFAULT_LEAK_TOLERANCE = 1e-3
DEFAULT_SPATIAL_FRACTION = 0.45
DEFAULT_FREQUENCY_FRACTION = 0.9
PACKET_FREQUENCY_WIDTHS = 6.0

Profile = Callable[[Array], Array]


def gaussian_profile(y: Array) -> Array:
    """``pi^{-d/4} exp(-|y|^2 / 2)``, of unit ``L^2`` norm."""
    d = jnp.shape(y)[-1]
    return jnp.pi ** (-d / 4) * jnp.exp(-0.5 * jnp.sum(y**2, axis=-1))


def profile_norm(profile: Profile, dim: int, *, extent: float = 10.0, n: int | None = None) -> float:
    """``||psi||_{L^2}`` by the trapezoid rule on ``[-extent, extent]^dim``."""
    n = n or (4001 if dim == 1 else 401)
    axis = np.linspace(-extent, extent, n)
    y = np.stack(np.meshgrid(*([axis] * dim), indexing="ij"), axis=-1)
    density = np.abs(np.asarray(profile(jnp.asarray(y)))) ** 2
    for _ in range(dim):
        density = scipy.integrate.trapezoid(density, axis, axis=0)
    return float(np.sqrt(density))


# ------------------------------------------------------------------------------
# Samples of h-indexed sequences
# ------------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LadderSample:
    """One member ``u_h`` of an ``h``-indexed sequence, realised on a periodic grid."""

    h: float
    grid: PeriodicGrid
    values: Array

    @property
    def mass(self) -> float:
        """``||u_h||^2``."""
        return float(self.grid.norm(self.values) ** 2)


@dataclass(frozen=True, eq=False)
class WavePacket:
    """``w_h(x) = h^{-d/4} e^{i <x, xi0> / h} psi(h^{-1/2} (x - x0))``.

    Attributes:
        x0: Spatial centre.
        xi0: Frequency centre (semiclassical units).
        h: Semiclassical parameter.
        profile: The profile ``psi``.
        profile_norm: ``||psi||_{L^2}``.
        grid: Grid the packet is realised on.
    """

    x0: NDArray
    xi0: NDArray
    h: float
    profile: Profile
    profile_norm: float
    grid: PeriodicGrid

    @property
    def dim(self) -> int:
        return len(self.x0)

    def __call__(self, x: Array) -> Array:
        return packet_function(self.x0, self.xi0, self.h, self.profile)(x)

    @functools.cached_property
    def values(self) -> Array:
        return self.grid.sample(self)

    @property
    def sample(self) -> LadderSample:
        return LadderSample(self.h, self.grid, self.values)

    def norm(self) -> float:
        return float(self.grid.norm(self.values))


def create_packet(
    grid: PeriodicGrid,
    x0: Sequence[float],
    xi0: Sequence[float],
    h: float,
    profile: Profile | None = None,
) -> WavePacket:
    """Realise a coherent packet on a periodic grid.

    Raises:
        AliasingError: If the packet frequencies ``|xi0| / h + O(h^{-1/2})`` do
            not fit the grid band.
    """
    x0 = np.asarray(x0, dtype=float)
    xi0 = np.asarray(xi0, dtype=float)
    if x0.shape != (grid.dim,) or xi0.shape != (grid.dim,):
        msg = f"packet centre of shapes {x0.shape}, {xi0.shape} on a {grid.dim}D grid"
        raise ConfigurationError(msg)
    radius = float(np.linalg.norm(xi0)) + PACKET_FREQUENCY_WIDTHS * math.sqrt(h)
    n = required_size(radius, h, grid.length)
    if n > grid.n:
        msg = f"packet with |xi0|={np.linalg.norm(xi0):.4g} at h={h:.4g} needs {n} points per axis, grid has {grid.n}"
        raise AliasingError(msg, required_size=n)
    if profile is None:
        return WavePacket(x0, xi0, float(h), gaussian_profile, 1.0, grid)
    return WavePacket(x0, xi0, float(h), profile, profile_norm(profile, grid.dim), grid)


def packet_function(x0: Sequence[float], xi0: Sequence[float], h: float, profile: Profile | None = None) -> Callable[[Array], Array]:
    """``x -> h^{-d/4} e^{i <x, xi0> / h} psi(h^{-1/2} (x - x0))`` for points ``(..., d)``."""
    x0 = jnp.asarray(x0, dtype=float)
    xi0 = jnp.asarray(xi0, dtype=float)
    profile = profile or gaussian_profile
    d = x0.shape[0]

    def packet(x):
        x = jnp.asarray(x, dtype=float)
        return h ** (-d / 4) * jnp.exp(1j * (x @ xi0) / h) * profile((x - x0) / jnp.sqrt(h))

    return packet


def basis_packet(basis: EigenBasis, x0: Sequence[float], xi0: Sequence[float], h: float, profile: Profile | None = None) -> NDArray:
    """Interior nodal values of the packet on a spectral basis mesh."""
    return basis.sample(packet_function(x0, xi0, h, profile))


def basis_to_grid(basis: EigenBasis, u: NDArray, grid: PeriodicGrid) -> Array:
    """P1 interpolation of an interior grid function onto a periodic grid, zero outside the mesh."""
    points = grid.points.reshape(-1, grid.dim)
    values = basis.mesh.interpolate(basis.to_nodes(u), points)
    return jnp.asarray(values.reshape(grid.shape))


# ------------------------------------------------------------------------------
# Scaling and leaks
# ------------------------------------------------------------------------------


def sobolev_ratio(packet: WavePacket, s: float = 1.0) -> float:
    """``||(-Delta)^{s/2} w_h|| / (h^{-s} |xi0|^s ||psi||)``, close to 1 as ``h -> 0``."""
    xi_norm = float(np.linalg.norm(packet.xi0))
    if xi_norm == 0.0:
        msg = "the Sobolev scaling of a packet needs xi0 != 0"
        raise ConfigurationError(msg)
    op = fourier_multiplier(
        lambda xi: jnp.sum(xi**2, axis=-1) ** (s / 2), 1.0, packet.grid, name=f"(-Delta)^{s / 2:g}"
    )
    value = float(packet.grid.norm(op(packet.values)))
    return value / (packet.h ** (-s) * xi_norm**s * packet.profile_norm)


@dataclass(frozen=True)
class LeakReport:
    """Share of ``||u_h||^2`` escaping to spatial or frequency infinity."""

    spatial_tail: float
    frequency_tail: float
    tolerance: float

    @property
    def leaked(self) -> bool:
        return self.spatial_tail > self.tolerance or self.frequency_tail > self.tolerance

    def to_dict(self) -> Report:
        return {
            "spatial_tail": self.spatial_tail,
            "frequency_tail": self.frequency_tail,
            "tolerance": self.tolerance,
            "leaked": self.leaked,
        }


def mass_leak(
    sample: LadderSample,
    *,
    center: Sequence[float] | None = None,
    radius: float | None = None,
    frequency_radius: float | None = None,
    tol: float = DEFAULT_LEAK_TOLERANCE,
) -> LeakReport:
    """Mass outside a spatial ball plus mass at semiclassical frequencies ``h |xi| >= R``.

    Args:
        sample: The sequence member.
        center: Ball centre (the grid box centre by default).
        radius: Ball radius in the periodic distance (``0.45 * length`` by default).
        frequency_radius: ``R`` (``0.9 h * nyquist``, just inside the grid band, by default).
        tol: Share of the mass above which a leak is flagged.

    Returns:
        The leak report.
    """
    grid = sample.grid
    center = np.full(grid.dim, grid.lo + 0.5 * grid.length) if center is None else np.asarray(center, dtype=float)
    radius = DEFAULT_SPATIAL_FRACTION * grid.length if radius is None else radius
    frequency_radius = DEFAULT_FREQUENCY_FRACTION * sample.h * grid.nyquist if frequency_radius is None else frequency_radius

    density = np.abs(np.asarray(sample.values)) ** 2
    total = float(density.sum())
    if total == 0.0:
        return LeakReport(0.0, 0.0, tol)
    offset = (grid.points - center + 0.5 * grid.length) % grid.length - 0.5 * grid.length
    outside = np.linalg.norm(offset, axis=-1) > radius
    spectrum = np.abs(np.fft.fftn(np.asarray(sample.values))) ** 2
    high = sample.h * np.linalg.norm(grid.frequencies, axis=-1) >= frequency_radius
    report = LeakReport(
        float(density[outside].sum() / total),
        float(spectrum[high].sum() / spectrum.sum()),
        tol,
    )
    if report.leaked:
        logger.warning(
            f"mass leak at h={sample.h:.4g}: spatial tail {report.spatial_tail:.3e}, "
            f"frequency tail {report.frequency_tail:.3e}"
        )
    return report


# ------------------------------------------------------------------------------
# Phase-space pictures
# ------------------------------------------------------------------------------


def husimi_density(sample: LadderSample, n_centres: int = 64) -> tuple[NDArray, NDArray, NDArray]:
    """Gaussian-windowed Fourier density of a 1D sequence member.

    The window has the packet width ``sqrt(h)``, so the density at ``(x, xi)`` is
    ``|<u_h, w_{x, xi}>|^2`` up to normalisation.

    Returns:
        ``(centres, h * frequencies, density)`` with frequencies increasing and
        ``density`` of shape ``(n_centres, n)`` summing to 1.
    """
    grid = sample.grid
    if grid.dim != 1:
        msg = f"phase-space densities are drawn for 1D grids, got {grid.dim}D"
        raise ConfigurationError(msg)
    centres = grid.lo + grid.length * np.arange(n_centres) / n_centres
    offset = (grid.axis[None, :] - centres[:, None] + 0.5 * grid.length) % grid.length - 0.5 * grid.length
    window = np.exp(-(offset**2) / (2.0 * sample.h))
    spectra = np.abs(np.fft.fft(np.asarray(sample.values)[None, :] * window, axis=-1)) ** 2
    order = np.argsort(grid.axis_frequencies)
    density = spectra[:, order]
    total = density.sum()
    return centres, sample.h * grid.axis_frequencies[order], density / total if total > 0 else density
