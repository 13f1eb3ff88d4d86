"""Operator-norm probes, kernels with Schur bounds and commutator decay."""

import warnings
from dataclasses import dataclass

import jax
import jax.numpy as jnp
import numpy as np
from loguru import logger

from gcckit.errors import ConfigurationError
from gcckit.semiclassical.grid import PeriodicGrid, grid_for_symbol
from gcckit.semiclassical.quantize import (
    GridOperator,
    commutator,
    compose,
    linear_combination,
    multiplication_operator,
    quantize,
)
from gcckit.semiclassical.symbols import Symbol, decay_norm
from gcckit.types import Array, Callable, NDArray, Report, Sequence

# ------------------------------------------------------------------------------
# Default values
# ------------------------------------------------------------------------------

DEFAULT_ITERATIONS = 30
DEFAULT_RESTARTS = 5
DEFAULT_NORM_TOLERANCE = 1e-2
DEFAULT_XI_EXTENT = 20.0
DEFAULT_XI_SAMPLES = 512

# ------------------------------------------------------------------------------
# Power iteration
# ------------------------------------------------------------------------------


@dataclass(frozen=True)
class NormProbe:
    """Estimated ``||A||`` with the per-restart estimates."""

    value: float
    converged: bool
    estimates: tuple[float, ...]
    iterations: int


def _power_iteration(op: GridOperator, adjoint: GridOperator, key, iterations: int) -> tuple[float, float]:
    """Estimate and last relative change of ``sqrt(||A* A v||)``."""
    shape = op.grid.shape
    k_re, k_im = jax.random.split(key)
    v = jax.random.normal(k_re, shape) + 1j * jax.random.normal(k_im, shape)
    v = v / jnp.linalg.norm(v)
    previous, estimate = 0.0, 0.0
    for _ in range(iterations):
        w = adjoint(op(v))
        size = float(jnp.linalg.norm(w))
        if size == 0.0:
            return 0.0, 0.0
        previous, estimate = estimate, np.sqrt(size)
        v = w / size
    change = abs(estimate - previous) / max(estimate, 1e-300)
    return estimate, change


def operator_norm(
    op: GridOperator,
    *,
    iterations: int = DEFAULT_ITERATIONS,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = 0,
    tol: float = DEFAULT_NORM_TOLERANCE,
) -> NormProbe:
    """Randomized power iteration on ``A* A``.

    The largest estimate over the restarts is returned. If no restart settles to
    a relative change below ``tol`` the probe is repeated once with twice the
    restarts and iterations before being flagged as unconverged.
    """
    adjoint = op.adjoint()
    key = jax.random.PRNGKey(seed)
    for attempt in range(2):
        keys = jax.random.split(jax.random.fold_in(key, attempt), restarts)
        runs = [_power_iteration(op, adjoint, k, iterations) for k in keys]
        estimates = tuple(float(value) for value, _ in runs)
        converged = any(change < tol for _, change in runs)
        if converged:
            return NormProbe(max(estimates), True, estimates, iterations)
        iterations, restarts = 2 * iterations, 2 * restarts
    msg = f"power iteration for ||{op.name}|| did not settle below relative change {tol}"
    logger.warning(msg)
    warnings.warn(msg, stacklevel=2)
    return NormProbe(max(estimates), False, estimates, iterations)


# ------------------------------------------------------------------------------
# Kernels
# ------------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class KernelReport:
    """Kernel ``k_a(x, v) = (2 pi)^{-d} int e^{i v xi} a(x, xi) d xi`` and its bounds.

    Attributes:
        x: Spatial samples ``(p, dim)``.
        v: Offsets ``(q, xi_dim)`` in ascending order per axis.
        values: ``(p, q)`` kernel samples.
        schur_bound: ``int sup_x |k_a(x, v)| dv``, which bounds ``||Op^h(a)||``
            for every ``h``.
        decay_norm: Sampled ``M_{0,d+1}^{-(d+1)}(a)``.
        decay_bound: ``pi M`` in 1D (explicit Schur constant), None otherwise.
        reliable: False when the sampled symbol does not show the claimed decay.
    """

    x: NDArray
    v: NDArray
    values: NDArray
    schur_bound: float
    decay_norm: float
    decay_bound: float | None
    reliable: bool

    @property
    def ratio(self) -> float:
        """Empirical constant ``schur_bound / M``."""
        return self.schur_bound / self.decay_norm if self.decay_norm > 0 else np.inf

    def sample(self, v: Array) -> NDArray:
        """Kernel at offsets ``v`` for every ``x`` (1D, by linear interpolation)."""
        if self.v.shape[1] != 1:
            msg = "kernel sampling by interpolation is available in 1D only"
            raise ConfigurationError(msg)
        v = np.atleast_1d(np.asarray(v, dtype=float))
        axis = self.v[:, 0]
        return np.stack([
            np.interp(v, axis, row.real) + 1j * np.interp(v, axis, row.imag) for row in self.values
        ])

    def to_dict(self) -> Report:
        return {
            "schur_bound": self.schur_bound,
            "decay_norm": self.decay_norm,
            "decay_bound": self.decay_bound,
            "ratio": self.ratio,
            "reliable": self.reliable,
        }


def kernel_and_schur(
    symbol: Symbol,
    x: Array,
    *,
    xi_extent: float = DEFAULT_XI_EXTENT,
    n_xi: int = DEFAULT_XI_SAMPLES,
) -> KernelReport:
    """Kernel of ``a`` by a DFT in ``xi`` at each ``x``, with Schur bounds.

    The semiclassical kernel of ``Op^h(a)`` is ``h^{-d} k_a(x, (x - y) / h)``,
    so the Schur integral does not depend on ``h``.

    Args:
        symbol: The symbol.
        x: Spatial samples ``(p, dim)``.
        xi_extent: Half-width of the ``xi`` box.
        n_xi: Samples per ``xi`` axis.

    Returns:
        The kernel report.
    """
    d = symbol.xi_dim
    x = np.atleast_2d(np.asarray(x, dtype=float))
    d_xi = 2 * xi_extent / n_xi
    axis = -xi_extent + d_xi * np.arange(n_xi)
    xi = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1)
    v_axis = 2 * np.pi * np.fft.fftfreq(n_xi, d=d_xi)
    v = np.stack(np.meshgrid(*([v_axis] * d), indexing="ij"), axis=-1)

    samples = symbol(jnp.asarray(x)[(slice(None),) + (None,) * d], jnp.asarray(xi)[None])
    transformed = jnp.fft.ifftn(samples, axes=tuple(range(1, d + 1))) * n_xi**d
    phase = jnp.exp(1j * jnp.sum(jnp.asarray(v), axis=-1) * axis[0])
    kernel = np.asarray(transformed * phase[None] * (d_xi / (2 * np.pi)) ** d)
    axes = tuple(range(1, d + 1))
    kernel = np.fft.fftshift(kernel, axes=axes).reshape(len(x), -1)
    v = np.fft.fftshift(v, axes=tuple(range(d))).reshape(-1, d)

    d_v = 2 * np.pi / (n_xi * d_xi)
    schur = float(np.abs(kernel).max(axis=0).sum() * d_v**d)
    stride = max(1, n_xi // 64) if d > 1 else 1
    xi_samples = xi[(slice(None, None, stride),) * d].reshape(-1, d)
    norm, decays = decay_norm(symbol, x, xi_samples, d + 1, d + 1)
    decay_bound = np.pi * norm if d == 1 else None
    if not decays:
        msg = f"symbol {symbol.name} does not show the claimed decay on |xi| <= {xi_extent}; the Schur bound is unreliable"
        logger.warning(msg)
        warnings.warn(msg, stacklevel=2)
    logger.debug(f"Schur bound of {symbol.name}: {schur:.6g} (M = {norm:.6g})")
    return KernelReport(x, v, kernel, schur, norm, decay_bound, decays)


# ------------------------------------------------------------------------------
# Commutators
# ------------------------------------------------------------------------------


@dataclass(frozen=True)
class DecayTable:
    """Commutator norms along an ``h`` ladder with fitted log-log slopes."""

    rows: list[Report]
    slope: float
    corrected_slope: float

    def to_dict(self) -> Report:
        return {"rows": self.rows, "slope": self.slope, "corrected_slope": self.corrected_slope}


def _slope(hs: Sequence[float], values: Sequence[float]) -> float:
    values = np.asarray(values, dtype=float)
    if np.any(values <= 0):
        return np.inf
    return float(np.polyfit(np.log(hs), np.log(values), 1)[0])


def corrected_commutator(symbol: Symbol, theta: Callable[[Array], Array], h: float, grid: PeriodicGrid, **kwargs) -> GridOperator:
    """``[Op^h(a), theta] + i h sum_j (d_j theta) Op^h(d_xi_j a)``."""
    points = jnp.asarray(grid.points.reshape(-1, grid.dim))
    gradient = jax.vmap(jax.grad(lambda x: jnp.sum(theta(x))))(points).reshape(*grid.shape, grid.dim)
    terms = [(1.0, commutator(quantize(symbol, h, grid, **kwargs), multiplication_operator(grid, theta, h)))]
    for j in range(grid.dim):
        slope_j = gradient[..., j]
        d_theta = GridOperator(lambda u, s=slope_j: s * u, grid, h, terms[0][1].kind, f"d{j + 1} theta")
        terms.append((1j * h, compose(d_theta, quantize(symbol.derivative_xi(j), h, grid, **kwargs))))
    return linear_combination(terms)


def commutator_decay(
    symbol: Symbol,
    theta: Callable[[Array], Array],
    h_list: Sequence[float],
    grid: PeriodicGrid | None = None,
    *,
    seed: int = 0,
    **kwargs,
) -> DecayTable:
    """Probe ``||[Op^h(a), theta]||`` and its first-order corrected version over ``h``.

    Args:
        symbol: A compactly supported symbol.
        theta: Multiplier ``x -> theta(x)`` (jax-differentiable).
        h_list: Semiclassical parameters.
        grid: Grid shared by every ``h``; by default the smallest admissible grid
            for the smallest ``h``.
        seed: Seed of the norm probes.
        **kwargs: Forwarded to `quantize`.

    Returns:
        The decay table with slopes of ``log ||.||`` against ``log h``.
    """
    h_list = sorted(float(h) for h in h_list)[::-1]
    if grid is None:
        if symbol.xi_radius is None:
            msg = "commutator_decay needs a grid for symbols without a support radius"
            raise ConfigurationError(msg)
        grid = grid_for_symbol(symbol.xi_radius, h_list[-1], symbol.dim)

    rows = []
    for h in h_list:
        plain = commutator(quantize(symbol, h, grid, **kwargs), multiplication_operator(grid, theta, h))
        corrected = corrected_commutator(symbol, theta, h, grid, **kwargs)
        rows.append({
            "h": h,
            "norm": operator_norm(plain, seed=seed).value,
            "corrected_norm": operator_norm(corrected, seed=seed).value,
        })
    hs = [row["h"] for row in rows]
    table = DecayTable(
        rows,
        _slope(hs, [row["norm"] for row in rows]),
        _slope(hs, [row["corrected_norm"] for row in rows]),
    )
    logger.info(
        f"Commutator decay of {symbol.name} on {grid.n} points: slope {table.slope:.3f}, "
        f"corrected slope {table.corrected_slope:.3f}"
    )
    return table
