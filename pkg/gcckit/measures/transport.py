"""Numerical checks of the transport identities satisfied by semiclassical measures.

Space-time symbols ``a(t, x, tau, xi)`` are `Symbol` objects of dimension
``d + 1`` whose first coordinate is ``t`` and first dual variable is ``tau``.
Along a solution on the branch ``tau = s |xi|`` the space-time pairing is
``int <Op^h(a(t, ., s |xi|, .)) u(t), u(t)> dt``.
"""

import warnings
from dataclasses import dataclass

import jax
import jax.numpy as jnp
import numpy as np
import scipy.integrate
from loguru import logger

from gcckit.dynamics.generalized import advance_generalized
from gcckit.errors import ConfigurationError, PreconditionError
from gcckit.geometry.collar import CollarChart, build_collar_chart
from gcckit.geometry.hamiltonian import PhasePoint
from gcckit.measures.estimate import dyadic_project, estimate_hermitian, extrapolate
from gcckit.measures.packets import (
    PACKET_FREQUENCY_WIDTHS,
    LadderSample,
    Profile,
    basis_to_grid,
    gaussian_profile,
    packet_function,
    profile_norm,
)
from gcckit.semiclassical.division import euclidean_divide
from gcckit.semiclassical.grid import PeriodicGrid, create_grid, required_size
from gcckit.semiclassical.quantize import quantize_family, quantize_samples
from gcckit.semiclassical.symbols import Symbol
from gcckit.spectral.assemble import EigenBasis
from gcckit.spectral.evolve import initial_state
from gcckit.types import Array, Callable, NDArray, Report, Sequence
from gcckit.util.ops import batched_map

# ------------------------------------------------------------------------------
# Default values
# ------------------------------------------------------------------------------

DEFAULT_SUPPORT_TOLERANCE = 1e-10
DEFAULT_GLANCING_BAND = 0.1
DEFAULT_GLANCING_SHARE = 0.5
DEFAULT_MISMATCH_FLOOR = 1e-8
DEFAULT_TUBE_RADIUS = 0.1
DEFAULT_BLOCK_TOLERANCE = 0.05
DEFAULT_CONCENTRATION = 0.9
SUPPORT_TIME_SAMPLES = 16
SUPPORT_SPACE_SAMPLES = 2048

# ------------------------------------------------------------------------------
# Space-time solutions
# ------------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SpaceTimeSample:
    """A solution ``u_h(t, x)`` sampled at increasing times on a periodic grid.

    Attributes:
        h: Semiclassical parameter.
        grid: Spatial grid.
        times: Sample times ``(n_t,)``.
        values: ``(n_t, *grid.shape)`` values.
        tau_sign: Sign ``s`` of the branch ``tau = s |xi|`` the solution lives on.
    """

    h: float
    grid: PeriodicGrid
    times: NDArray
    values: Array
    tau_sign: int = 1

    def shifted(self, dt: float) -> "SpaceTimeSample":
        """The same values attached to the times ``t + dt``."""
        return SpaceTimeSample(self.h, self.grid, self.times + dt, self.values, self.tau_sign)


def propagate(sample: LadderSample, times: Sequence[float], tau_sign: int = 1) -> SpaceTimeSample:
    """Free flat half-wave evolution ``u(t) = exp(i s t |D|) u_0``.

    With ``s = tau_sign`` the solution satisfies ``h D_t u = s h |D| u``, i.e. it
    lives on the branch ``tau = s |xi|`` of the flat wave symbol.
    """
    grid = sample.grid
    times = np.asarray(times, dtype=float)
    modulus = jnp.linalg.norm(jnp.asarray(grid.frequencies), axis=-1)
    axes = tuple(range(1, grid.dim + 1))
    u_hat = jnp.fft.fftn(jnp.asarray(sample.values))
    phases = jnp.exp(1j * tau_sign * jnp.asarray(times)[(slice(None),) + (None,) * grid.dim] * modulus[None])
    values = jnp.fft.ifftn(phases * u_hat[None], axes=axes)
    return SpaceTimeSample(sample.h, grid, times, values, int(np.sign(tau_sign)))


def _branch_family(symbol: Symbol, tau_sign: int) -> Callable[[Array, Array, Array], Array]:
    def family(t, x, xi):
        shape = jnp.broadcast_shapes(x.shape[:-1], xi.shape[:-1])
        big_x = jnp.concatenate(
            [jnp.broadcast_to(t, shape + (1,)), jnp.broadcast_to(x, shape + x.shape[-1:])], axis=-1
        )
        big_xi = jnp.concatenate(
            [tau_sign * jnp.linalg.norm(xi, axis=-1, keepdims=True) * jnp.ones(shape + (1,)),
             jnp.broadcast_to(xi, shape + xi.shape[-1:])],
            axis=-1,
        )
        return symbol.fn(big_x, big_xi)

    return family


def space_time_pairings(symbol: Symbol, solution: SpaceTimeSample, values: Array | None = None, **kwargs) -> NDArray:
    """``<Op^h(a(t, ., s |xi|, .)) u(t), u(t)>`` at every sample time.

    Args:
        symbol: Space-time symbol.
        solution: The solution.
        values: Replacement values (for example a truncation of the solution).
        **kwargs: Additional options:
            - quantize_batch_size: Rows per batch inside the quantization.
            - space_time_pairings_batch_size: Times per `jax.lax.map` batch.
    """
    _check_space_time(symbol, solution.grid)
    family = quantize_family(
        _branch_family(symbol, solution.tau_sign), solution.h, solution.grid, symbol.xi_radius, **kwargs
    )
    grid = solution.grid
    values = solution.values if values is None else values

    def one(args):
        t, u = args
        return grid.inner(family(u, t), u)

    pairings = batched_map(
        one,
        (jnp.asarray(solution.times), jnp.asarray(values)),
        batch_size=kwargs.get("space_time_pairings_batch_size"),
    )
    return np.asarray(pairings)


def _check_space_time(symbol: Symbol, grid: PeriodicGrid) -> None:
    if symbol.dim != grid.dim + 1 or symbol.xi_dim != grid.dim + 1:
        msg = f"a space-time symbol on a {grid.dim}D grid needs dimensions {grid.dim + 1}, got ({symbol.dim}, {symbol.xi_dim})"
        raise ConfigurationError(msg)


def _coordinate_derivative(fn, k: int):
    def derivative(x, xi):
        x = jnp.asarray(x, dtype=float)
        tangent = jnp.zeros_like(x).at[..., k].set(1.0)
        return jax.jvp(lambda y: fn(y, xi), (x,), (tangent,))[1]

    return derivative


def flat_hamiltonian(symbol: Symbol) -> Symbol:
    """``H_p a = -2 tau d_t a + 2 xi . grad_x a`` for ``p = -tau^2 + |xi|^2``."""
    derivatives = [_coordinate_derivative(symbol.fn, k) for k in range(symbol.dim)]

    def hp(x, xi):
        xi = jnp.asarray(xi, dtype=float)
        value = -2.0 * xi[..., 0] * derivatives[0](x, xi)
        for k in range(1, symbol.dim):
            value = value + 2.0 * xi[..., k] * derivatives[k](x, xi)
        return value

    return Symbol(hp, symbol.dim, symbol.xi_dim, f"H_p({symbol.name})", None, symbol.xi_radius)


def _support_samples(symbol: Symbol, solution: SpaceTimeSample) -> tuple[float, float, float]:
    """``(max |a|, max |a| at the time ends, max |a| on the null section)`` on sample points."""
    grid = solution.grid
    stride = max(1, grid.size // SUPPORT_SPACE_SAMPLES)
    x = jnp.asarray(grid.points.reshape(-1, grid.dim)[::stride])
    xi = solution.h * jnp.asarray(grid.frequencies.reshape(-1, grid.dim)[::stride])
    family = _branch_family(symbol, solution.tau_sign)
    step = max(1, len(solution.times) // SUPPORT_TIME_SAMPLES)
    interior = solution.times[::step]

    def peak(t, xs, xis):
        return float(jnp.abs(family(t, xs[:, None, :], xis[None, :, :])).max())

    overall = max(peak(t, x, xi) for t in interior)
    ends = max(peak(t, x, xi) for t in (solution.times[0], solution.times[-1]))
    null = max(peak(t, x, jnp.zeros((1, grid.dim))) for t in interior)
    return overall, ends, null


@dataclass(frozen=True)
class TransportResidual:
    """``<mu_h, H_p a>`` along a ladder.

    Attributes:
        hs: Ladder values, decreasing.
        values: Residuals per rung.
        scale: Sampled ``sup |H_p a|`` on the characteristic branch.
        limit: Extrapolated residual.
        spread: Last-two-rung spread.
    """

    hs: tuple[float, ...]
    values: tuple[float, ...]
    scale: float
    limit: float
    spread: float

    @property
    def relative(self) -> float:
        """Finest residual relative to the symbol scale."""
        return abs(self.values[-1]) / self.scale if self.scale > 0 else 0.0

    def to_dict(self) -> Report:
        return {
            "h": list(self.hs),
            "residuals": list(self.values),
            "scale": self.scale,
            "limit": self.limit,
            "spread": self.spread,
            "relative": self.relative,
        }


def interior_transport_residual(
    solutions: Sequence[SpaceTimeSample],
    symbol: Symbol,
    *,
    hamiltonian: Callable[[Symbol], Symbol] | None = None,
    support_tol: float = DEFAULT_SUPPORT_TOLERANCE,
    **kwargs,
) -> TransportResidual:
    """Estimate ``<mu, H_p a>`` for an interior-supported space-time symbol.

    Args:
        solutions: Solutions of the homogeneous wave equation, one per ``h``.
        symbol: Space-time symbol vanishing at the time ends and near ``xi = 0``.
        hamiltonian: Maps a symbol to ``H_p a`` (flat by default).
        support_tol: Relative size of ``a`` tolerated on the excluded sets.
        **kwargs: Forwarded to `space_time_pairings`.

    Returns:
        The residual along the ladder; it tends to 0 as ``h -> 0``.

    Raises:
        PreconditionError: If the symbol does not vanish at the time ends or on
            the null section.
    """
    if not solutions:
        msg = "the transport residual needs at least one solution"
        raise PreconditionError(msg)
    ordered = sorted(solutions, key=lambda solution: -solution.h)
    overall, ends, null = _support_samples(symbol, ordered[-1])
    if ends > support_tol * max(overall, 1.0) or null > support_tol * max(overall, 1.0):
        msg = (
            f"symbol {symbol.name} must vanish at the time ends and near xi = 0 "
            f"(sampled {ends:.3e} and {null:.3e})"
        )
        raise PreconditionError(msg)

    hp = (hamiltonian or flat_hamiltonian)(symbol)
    values = []
    for solution in ordered:
        pairings = space_time_pairings(hp, solution, **kwargs)
        values.append(float(scipy.integrate.trapezoid(pairings.real, solution.times)))
        logger.debug(f"transport residual at h={solution.h:.4g}: {values[-1]:.4e}")
    scale, _, _ = _support_samples(hp, ordered[-1])
    hs = tuple(float(solution.h) for solution in ordered)
    limit, spread = extrapolate(hs, values)
    residual = TransportResidual(hs, tuple(values), scale, float(limit.real), float(spread))
    logger.info(f"Interior transport residual {residual.values[-1]:.4e} (relative {residual.relative:.3e})")
    return residual


# ------------------------------------------------------------------------------
# Boundary jumps on the half-line
# ------------------------------------------------------------------------------


def half_line_reflection(
    space: PeriodicGrid,
    time: PeriodicGrid,
    h: float,
    z0: float,
    xi0: float = 1.0,
    profile: Profile | None = None,
) -> tuple[SpaceTimeSample, LadderSample]:
    """Exact Dirichlet reflection of a packet on ``z > 0`` by the method of images.

    ``u(t, z) = F(z + t) - F(t - z)`` with ``F(s) = h^{-1/4} e^{i s xi0 / h}
    psi((s - z0) / sqrt(h))``: the incoming packet starts at ``z0``, hits the
    boundary at ``t = z0`` and the Neumann trace is ``h d_z u(t, 0) = 2 h F'(t)``.

    Args:
        space: Grid on a box symmetric about ``z = 0``; the odd extension is stored.
        time: Periodic time grid.
        h: Semiclassical parameter.
        z0: Initial distance of the packet from the boundary.
        xi0: Frequency (``> 0``: the solution lives on ``tau = |zeta|``).
        profile: Profile ``psi`` (Gaussian by default).

    Returns:
        The solution on ``space`` at the times of ``time`` and the trace on ``time``.
    """
    if space.dim != 1 or time.dim != 1:
        msg = "the half-line reflection lives on 1D space and time grids"
        raise ConfigurationError(msg)
    if xi0 <= 0:
        msg = f"the incoming packet needs xi0 > 0, got {xi0}"
        raise ConfigurationError(msg)
    profile = profile or gaussian_profile

    def packet(s):
        s = jnp.asarray(s, dtype=float)
        return h**-0.25 * jnp.exp(1j * s * xi0 / h) * profile(((s - z0) / jnp.sqrt(h))[..., None])

    times = jnp.asarray(time.axis)
    z = jnp.asarray(space.axis)
    values = packet(z[None, :] + times[:, None]) - packet(times[:, None] - z[None, :])
    slope = jax.jvp(packet, (times,), (jnp.ones_like(times),))[1]
    solution = SpaceTimeSample(h, space, np.asarray(time.axis), values, 1)
    return solution, LadderSample(h, time, 2.0 * h * slope)


@dataclass(frozen=True)
class JumpRung:
    """Both sides of the boundary jump identity at one ``h``."""

    h: float
    lhs: float
    rhs: float
    mismatch: float
    glancing_share: float
    glancing: bool

    def to_dict(self) -> Report:
        return {
            "h": self.h,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "mismatch": self.mismatch,
            "glancing_share": self.glancing_share,
            "glancing": self.glancing,
        }


@dataclass(frozen=True)
class JumpReport:
    rungs: tuple[JumpRung, ...]

    @property
    def finest(self) -> JumpRung:
        return self.rungs[-1]

    @property
    def glancing(self) -> bool:
        return any(rung.glancing for rung in self.rungs)

    def to_dict(self) -> Report:
        return {"rungs": [rung.to_dict() for rung in self.rungs], "glancing": self.glancing}


def _jump_remainder(symbol: Symbol, trace: LadderSample) -> NDArray:
    """``b1(t_j, tau_k)`` of ``a(t, 0, tau, zeta)`` divided by ``p = zeta^2 - tau^2``."""
    grid = trace.grid
    t = np.repeat(grid.axis, grid.n)[:, None]
    tau = np.tile(trace.h * grid.axis_frequencies, grid.n)[:, None]

    def boundary_symbol(y, eta, zeta):
        # the roots of zeta^2 - tau^2 are real
        zeta = jnp.real(jnp.asarray(zeta))
        shape = zeta.shape
        x = jnp.stack([jnp.broadcast_to(y[..., 0], shape), jnp.zeros(shape)], axis=-1)
        xi = jnp.stack([jnp.broadcast_to(eta[..., 0], shape), zeta], axis=-1)
        return symbol.fn(x, xi)

    def wave_symbol(y, eta, zeta):
        return zeta**2 - eta[..., 0] ** 2

    result = euclidean_divide(boundary_symbol, wave_symbol, t, tau, [0.0])
    return result.b1.reshape(grid.n, grid.n)


def boundary_jump_residual(
    solutions: Sequence[SpaceTimeSample],
    traces: Sequence[LadderSample],
    symbol: Symbol,
    *,
    glancing_band: float = DEFAULT_GLANCING_BAND,
    glancing_share: float = DEFAULT_GLANCING_SHARE,
    floor: float = DEFAULT_MISMATCH_FLOOR,
    **kwargs,
) -> JumpReport:
    """Compare ``<H_p mu, a>`` with the jump integral of the trace measure on ``z > 0``.

    ``lhs = -int <Op^h(H_p a) 1_{z>0} u, 1_{z>0} u> dt`` and
    ``rhs = <Op^h(b1) v, v>`` on the time grid, where ``v = h d_z u|_{z=0}`` and
    ``b1 = (a(zeta+) - a(zeta-)) / (zeta+ - zeta-)`` is the remainder coefficient of
    `euclidean_divide`. At glancing (``tau -> 0``) ``b1`` becomes ``d_zeta a``.

    Args:
        solutions: Solutions with the odd extension to ``z < 0``, one per ``h``.
        traces: Neumann traces on periodic time grids whose points are the
            solution times, one per ``h``.
        symbol: Space-time symbol ``a(t, z, tau, zeta)``.
        glancing_band: ``|tau|`` below which trace mass counts as glancing.
        glancing_share: Share of glancing trace mass that raises the flag.
        floor: Floor of the mismatch denominator.
        **kwargs: Forwarded to `space_time_pairings`.

    Returns:
        The per-rung comparison.
    """
    if len(solutions) != len(traces) or not solutions:
        msg = "boundary jump checks need one trace per solution"
        raise PreconditionError(msg)
    ordered = sorted(zip(solutions, traces, strict=True), key=lambda pair: -pair[0].h)
    hp = flat_hamiltonian(symbol)
    rungs = []
    for solution, trace in ordered:
        if solution.grid.dim != 1 or trace.h != solution.h:
            msg = "boundary jump checks run on the half-line with matching h"
            raise PreconditionError(msg)
        if len(trace.grid.axis) != len(solution.times) or not np.allclose(trace.grid.axis, solution.times):
            msg = "the trace time grid must carry the solution times"
            raise PreconditionError(msg)
        inside = jnp.asarray(solution.grid.axis > 0.0)
        pairings = space_time_pairings(hp, solution, jnp.where(inside[None, :], solution.values, 0.0), **kwargs)
        lhs = -float(scipy.integrate.trapezoid(pairings.real, solution.times))

        op = quantize_samples(_jump_remainder(symbol, trace), trace.h, trace.grid)
        rhs = float(trace.grid.inner(op(trace.values), trace.values).real)

        spectrum = np.abs(np.fft.fft(np.asarray(trace.values))) ** 2
        near = np.abs(trace.h * trace.grid.axis_frequencies) <= glancing_band
        share = float(spectrum[near].sum() / max(spectrum.sum(), floor))
        glancing = share > glancing_share
        if glancing:
            msg = f"trace mass at h={trace.h:.4g} is {share:.1%} glancing; the jump uses d_zeta a there"
            logger.warning(msg)
            warnings.warn(msg, stacklevel=2)
        mismatch = abs(lhs - rhs) / max(abs(lhs), abs(rhs), floor)
        rungs.append(JumpRung(float(solution.h), lhs, rhs, mismatch, share, glancing))
        logger.debug(f"boundary jump at h={solution.h:.4g}: lhs {lhs:.5e}, rhs {rhs:.5e}")
    report = JumpReport(tuple(rungs))
    logger.info(f"Boundary jump mismatch {report.finest.mismatch:.3%} at h={report.finest.h:.4g}")
    return report


# ------------------------------------------------------------------------------
# Isochrone data
# ------------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class IsochroneReport:
    """Hermitian block of the initial data and forward concentration of the wave.

    Attributes:
        block: Measured ``2x2`` block of ``(u0, h u1)`` paired with ``a``.
        expected: ``a(x0, xi0) |chi(tau0^2)|^2 ||psi||^2 [[1, -i tau0], [i tau0, tau0^2]]``.
        block_error: ``max |block - expected| / max |expected|``.
        forward_fraction: Share of the wave on the time-frequency sign of ``tau0``.
        tube_fractions: Share of ``||u(t)||^2`` within ``radius`` of the ray, per time.
        times: The sample times (all positive).
        radius: Tube radius.
    """

    block: NDArray
    expected: NDArray
    block_error: float
    forward_fraction: float
    tube_fractions: NDArray
    times: NDArray
    radius: float

    @property
    def concentration(self) -> float:
        return float(self.forward_fraction * np.mean(self.tube_fractions))

    def passes(
        self, block_tolerance: float = DEFAULT_BLOCK_TOLERANCE, concentration: float = DEFAULT_CONCENTRATION
    ) -> bool:
        return self.block_error <= block_tolerance and self.concentration >= concentration

    def to_dict(self) -> Report:
        return {
            "block": [[[float(v.real), float(v.imag)] for v in row] for row in self.block],
            "expected": [[[float(v.real), float(v.imag)] for v in row] for row in self.expected],
            "block_error": self.block_error,
            "forward_fraction": self.forward_fraction,
            "tube_fractions": self.tube_fractions.tolist(),
            "times": self.times.tolist(),
            "radius": self.radius,
            "concentration": self.concentration,
        }


def _covering_grid(basis: EigenBasis, radius: float, h: float) -> PeriodicGrid:
    box = np.asarray(basis.mesh.domain.bounding_box, dtype=float)
    length = float(np.max(box[:, 1] - box[:, 0]))
    center = 0.5 * (box[:, 0].min() + box[:, 1].max())
    span = 1.5 * length
    return create_grid(basis.mesh.dim, max(required_size(radius, h, span), 16), center - span / 2, center + span / 2)


def isochrone_check(
    basis: EigenBasis,
    h: float,
    x0: Sequence[float],
    xi0: Sequence[float],
    tau0: float,
    symbol: Symbol,
    chi: Callable[[NDArray], NDArray],
    times: Sequence[float],
    *,
    radius: float = DEFAULT_TUBE_RADIUS,
    one_sided: bool = True,
    chart: CollarChart | None = None,
    profile: Profile | None = None,
    grid: PeriodicGrid | None = None,
) -> IsochroneReport:
    """Build ``u0 = chi(h^2 A) w_h`` and ``u1 = i h^{-1} tau0 u0`` and check their measures.

    Args:
        basis: Dirichlet eigenbasis.
        h: Semiclassical parameter.
        x0: Packet centre, away from the boundary.
        xi0: Packet frequency.
        tau0: Time frequency with ``tau0^2 = |xi0|_g^2`` at ``x0``.
        symbol: Spatial test symbol ``a(x, xi)``.
        chi: Band function of ``h^2 lambda``.
        times: Positive evolution times.
        radius: Tube radius around the ray through ``(0, x0, tau0, xi0)``.
        one_sided: Use ``u1 = i tau0 u0 / h``; False gives ``u1 = 0``, which
            splits the packet between both branches.
        chart: Collar chart for tracing the ray (built on demand).
        profile: Packet profile (Gaussian by default).
        grid: Periodic grid for the pairings (covering the domain by default).

    Returns:
        The report.

    Raises:
        PreconditionError: If ``tau0`` does not lie on the characteristic set
            over ``(x0, xi0)``, the packet touches the boundary, or a time is
            not positive.
    """
    metric = basis.metric
    x0 = np.asarray(x0, dtype=float)
    xi0 = np.asarray(xi0, dtype=float)
    times = np.asarray(times, dtype=float)
    shell = float(xi0 @ np.asarray(metric.g_inv(jnp.asarray(x0))) @ xi0)
    if abs(tau0**2 - shell) > 1e-6 * max(shell, 1.0):
        msg = f"tau0^2 = {tau0**2:.6g} differs from |xi0|_g^2 = {shell:.6g}"
        raise PreconditionError(msg)
    if np.any(times <= 0):
        msg = "isochrone evolution times must be positive"
        raise PreconditionError(msg)

    packet = packet_function(x0, xi0, h, profile)
    peak = float(np.abs(basis.sample(packet)).max())
    edge = np.asarray(packet(jnp.asarray(basis.mesh.nodes[basis.mesh.boundary])))
    if edge.size and float(np.abs(edge).max()) > 1e-6 * peak:
        msg = "the packet is not supported away from the boundary"
        raise PreconditionError(msg)

    u0 = dyadic_project(basis, chi, h, basis.sample(packet))
    u1 = 1j * tau0 / h * u0
    xi_radius = float(np.linalg.norm(xi0)) + PACKET_FREQUENCY_WIDTHS * np.sqrt(h)
    if symbol.xi_radius is not None:
        xi_radius = max(xi_radius, symbol.xi_radius)
    grid = grid or _covering_grid(basis, xi_radius, h)
    first = LadderSample(h, grid, basis_to_grid(basis, u0, grid))
    second = LadderSample(h, grid, basis_to_grid(basis, h * u1, grid))
    block = estimate_hermitian([(first, second)], [symbol]).blocks[0, -1]

    norm = 1.0 if profile is None else profile_norm(profile, len(x0)) ** 2
    weight = complex(symbol(x0, xi0)) * abs(complex(np.asarray(chi(np.array([tau0**2])))[0])) ** 2 * norm
    expected = weight * np.array([[1.0, -1j * tau0], [1j * tau0, tau0**2]])
    block_error = float(np.abs(block - expected).max() / np.abs(expected).max())

    state = initial_state(basis, u0, u1 if one_sided else None, h=h)
    forward, backward = np.sum(np.abs(state.a) ** 2), np.sum(np.abs(state.b) ** 2)
    forward_fraction = float((forward if tau0 > 0 else backward) / (forward + backward))

    chart = chart or build_collar_chart(basis.mesh.domain, metric)
    rho0 = PhasePoint(0.0, x0, float(tau0), xi0)
    (ray,) = advance_generalized(metric, chart, rho0, float(times.max()))
    nodes = basis.interior_nodes
    fractions = []
    for t in times:
        density = np.abs(state.at(t).u) ** 2 * basis.weights
        near = np.linalg.norm(nodes - ray.position_at(t), axis=-1) <= radius
        fractions.append(float(density[near].sum() / density.sum()))
    report = IsochroneReport(block, expected, block_error, forward_fraction, np.array(fractions), times, radius)
    logger.info(
        f"Isochrone data at h={h:.4g}: block error {block_error:.3%}, forward share {forward_fraction:.3f}, "
        f"concentration {report.concentration:.3f}"
    )
    return report
