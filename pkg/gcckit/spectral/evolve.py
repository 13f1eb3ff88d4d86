"""Spectral wave evolution, energies and Neumann traces.

A solution of ``d_t^2 u - A u = 0`` with Dirichlet data is stored by its
time-0 amplitudes ``(a, b)``:
``u(t) = sum_nu (a_nu e^{i t w_nu} + b_nu e^{-i t w_nu}) e_nu`` with
``w_nu = sqrt(lambda_nu)``. One-sided packets keep only ``a`` (or only ``b``).
"""

import dataclasses
from dataclasses import dataclass

import jax
import jax.numpy as jnp
import numpy as np
from loguru import logger
from scipy.integrate import trapezoid

from gcckit.errors import PreconditionError
from gcckit.spectral.assemble import EigenBasis
from gcckit.types import NDArray, Report, Sequence

# ------------------------------------------------------------------------------
# Wave states
# ------------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class WaveState:
    """A discrete wave in the eigenbasis.

    Attributes:
        basis: The eigenbasis.
        a: Amplitudes of ``e^{+i t w}``, at time 0.
        b: Amplitudes of ``e^{-i t w}``, at time 0.
        t: Current time.
        h: Semiclassical scale attached to the state.
    """

    basis: EigenBasis
    a: NDArray
    b: NDArray
    t: float = 0.0
    h: float = 1.0

    @property
    def coefficients(self) -> NDArray:
        """``<u(t), e_nu>``."""
        w = self.basis.sqrt_lambdas
        return self.a * np.exp(1j * self.t * w) + self.b * np.exp(-1j * self.t * w)

    @property
    def velocity_coefficients(self) -> NDArray:
        """``<d_t u(t), e_nu>``."""
        w = self.basis.sqrt_lambdas
        return 1j * w * (self.a * np.exp(1j * self.t * w) - self.b * np.exp(-1j * self.t * w))

    @property
    def u(self) -> NDArray:
        """Values on the interior nodes."""
        return self.basis.synthesize(self.coefficients)

    @property
    def du(self) -> NDArray:
        return self.basis.synthesize(self.velocity_coefficients)

    def norm(self) -> float:
        """``||u(t)||``, which equals the l2 norm of the coefficients."""
        return float(np.linalg.norm(self.coefficients))

    def at(self, t: float) -> "WaveState":
        return dataclasses.replace(self, t=float(t))


def initial_state(
    basis: EigenBasis,
    u0: NDArray,
    u1: NDArray | None = None,
    *,
    t: float = 0.0,
    h: float = 1.0,
) -> WaveState:
    """The wave with data ``(u(t), d_t u(t)) = (u0, u1)`` on the interior nodes."""
    w = basis.sqrt_lambdas
    c0 = basis.expand(u0)
    c1 = np.zeros_like(c0) if u1 is None else basis.expand(u1)
    a = 0.5 * (c0 + c1 / (1j * w)) * np.exp(-1j * t * w)
    b = 0.5 * (c0 - c1 / (1j * w)) * np.exp(1j * t * w)
    return WaveState(basis, a, b, float(t), h)


def packet(
    basis: EigenBasis,
    coefficients: NDArray,
    indices: Sequence[int],
    sign: int = 1,
    h: float = 1.0,
) -> WaveState:
    """One-sided packet ``sum_{nu in indices} c_nu e^{sign i t w_nu} e_nu``."""
    indices = np.asarray(indices, dtype=int)
    coefficients = np.asarray(coefficients, dtype=complex)
    if coefficients.shape != indices.shape:
        msg = f"{coefficients.size} coefficients for {indices.size} modes"
        raise PreconditionError(msg)
    amplitudes = np.zeros(basis.count, dtype=complex)
    amplitudes[indices] = coefficients
    zeros = np.zeros(basis.count, dtype=complex)
    if sign > 0:
        return WaveState(basis, amplitudes, zeros, 0.0, h)
    return WaveState(basis, zeros, amplitudes, 0.0, h)


def evolve(
    state: WaveState | tuple[NDArray, NDArray], t: float, basis: EigenBasis | None = None
) -> WaveState:
    """The wave at time ``t``, from a state or from data ``(u0, u1)`` at time 0."""
    if isinstance(state, WaveState):
        return state.at(t)
    if basis is None:
        msg = "evolving raw data needs the eigenbasis"
        raise PreconditionError(msg)
    u0, u1 = state
    return initial_state(basis, u0, u1).at(t)


def energies(state: WaveState, h: float | None = None) -> tuple[float, float]:
    """``E = 1/2 (||grad u||^2 + ||d_t u||^2)`` (kappa-weighted) and ``E^h = h^2 E``."""
    h = state.h if h is None else h
    energy = 0.5 * float(
        np.sum(state.basis.lambdas * np.abs(state.coefficients) ** 2)
        + np.sum(np.abs(state.velocity_coefficients) ** 2)
    )
    return energy, h**2 * energy


# ------------------------------------------------------------------------------
# Boundary traces
# ------------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class NormalDerivatives:
    """Normal derivatives ``d_n e_nu`` of every mode at boundary samples.

    Attributes:
        sigmas: Boundary parameters (corner neighbourhoods excluded).
        points: ``q(sigma)``.
        weights: Arc-length quadrature weights (1 per endpoint in 1D).
        values: ``(n_sigma, n_modes)`` matrix.
    """

    sigmas: NDArray
    points: NDArray
    weights: NDArray
    values: NDArray


def mode_normal_derivatives(basis: EigenBasis, n_boundary: int | None = None) -> NormalDerivatives:
    """One-sided second-order normal derivatives of the modes.

    Uses ``d_z u(0) ~ (4 u(D) - u(2 D)) / (2 D)`` along the inward normal with
    ``D = dx`` and ``u(0) = 0``, scaled to the metric normal
    ``n_g = G nu / sqrt(nu^T G nu)``. Parameters closer than ``2 D`` to a corner
    are skipped.
    """
    mesh, domain = basis.mesh, basis.mesh.domain
    step = mesh.spacing
    if n_boundary is None:
        n_boundary = max(int(np.ceil(domain.boundary_length / step)), 8)
    sigmas = domain.boundary_parameters(n_boundary, avoid_corners=2 * step)
    if domain.dim == 1:
        weights = np.ones(len(sigmas))
    else:
        weights = np.full(len(sigmas), domain.boundary_length / n_boundary)

    points = np.array([np.asarray(domain.boundary_point(s)) for s in sigmas])
    normals = np.array([np.asarray(domain.inward_normal(s)) for s in sigmas])
    stencil = np.concatenate([points + step * normals, points + 2 * step * normals])
    nodal = basis.to_nodes(basis.modes)
    samples = np.asarray(mesh.interpolate(nodal, stencil))
    near, far = samples[: len(sigmas)], samples[len(sigmas) :]
    derivative = (4 * near - far) / (2 * step)

    def normal_scale(q, nu):
        return jnp.sqrt(nu @ basis.metric.g_inv(q) @ nu)

    scale = np.asarray(jax.vmap(normal_scale)(jnp.asarray(points), jnp.asarray(normals)))
    return NormalDerivatives(sigmas, points, weights, derivative * scale[:, None])


@dataclass(frozen=True, eq=False)
class BoundaryTrace:
    """Samples of ``v = h d_n u`` on boundary parameters and times.

    Attributes:
        sigmas: Boundary parameters.
        times: Time grid.
        values: ``(n_times, n_sigma)`` samples.
        weights: Boundary quadrature weights.
        h: The scale used.
        admissibility: ``||v||^2_{L2((0,T) x boundary)} / int_0^T E^h dt``.
    """

    sigmas: NDArray
    times: NDArray
    values: NDArray
    weights: NDArray
    h: float
    admissibility: float

    def norm_squared(self) -> float:
        per_time = np.sum(np.abs(self.values) ** 2 * self.weights, axis=1)
        return float(trapezoid(per_time, self.times))

    def to_dict(self) -> Report:
        return {
            "sigmas": self.sigmas.tolist(),
            "times": self.times.tolist(),
            "h": self.h,
            "admissibility": self.admissibility,
            "norm_squared": self.norm_squared(),
        }


def neumann_trace(
    state: WaveState,
    times: NDArray,
    *,
    h: float | None = None,
    derivatives: NormalDerivatives | None = None,
) -> BoundaryTrace:
    """Trace ``h d_n u`` of a wave on the boundary over a time grid.

    Args:
        state: The wave.
        times: Increasing time grid starting at the integration origin.
        h: Scale of the trace, ``state.h`` by default.
        derivatives: Precomputed mode derivatives.

    Returns:
        The trace with its admissibility ratio.
    """
    h = state.h if h is None else h
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) < 2 or np.any(np.diff(times) <= 0):
        msg = "neumann_trace needs an increasing time grid with at least two points"
        raise PreconditionError(msg)
    derivatives = derivatives or mode_normal_derivatives(state.basis)
    coefficients = np.stack([state.at(t).coefficients for t in times])
    values = h * coefficients @ derivatives.values.T

    _, energy_h = energies(state, h)
    trace = BoundaryTrace(derivatives.sigmas, times, values, derivatives.weights, h, np.nan)
    denominator = energy_h * (times[-1] - times[0])
    ratio = trace.norm_squared() / denominator if denominator > 0 else np.nan
    logger.debug(f"Neumann trace on {len(derivatives.sigmas)} boundary samples, admissibility {ratio:.4g}")
    return dataclasses.replace(trace, admissibility=float(ratio))
