"""Interior Hamiltonian flow.

Rays are integrated in physical time with the field ``H_p / (-2 tau)`` by an
adaptive Dormand-Prince 5(4) scheme running inside one jitted
``lax.while_loop``. After every accepted step ``xi`` is rescaled onto the shell
``p = 0``. A step whose end point leaves the domain stops the loop and the
crossing is located on the dense step by `scipy.optimize.brentq`.
"""

import functools
from dataclasses import dataclass

import jax
import jax.numpy as jnp
import numpy as np
from loguru import logger
from scipy.optimize import brentq

from gcckit.enums import SegmentKind
from gcckit.errors import IntegrationError, PreconditionError
from gcckit.geometry.domain import Domain
from gcckit.geometry.hamiltonian import (
    PhasePoint,
    hamiltonian_vector,
    split_state,
    symbol_value,
)
from gcckit.geometry.metric import DEFAULT_TOLERANCES, MetricField, Tolerances
from gcckit.types import NDArray, StateVector

# ------------------------------------------------------------------------------
# Default values
# ------------------------------------------------------------------------------

DEFAULT_RTOL = 1e-9
DEFAULT_ATOL = 1e-11
DEFAULT_MAX_STEP = 0.05
DEFAULT_MIN_STEP = 1e-12
DEFAULT_MAX_SAMPLES = 1024

RUNNING, END, EVENT, UNDERFLOW, FULL = 0, 1, 2, 3, 4

# Dormand-Prince 5(4) tableau
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
)
_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)


@dataclass(frozen=True)
class TrajectorySegment:
    """A sampled piece of ray between two boundary events.

    Attributes:
        states: Packed states ``(t, x, tau, xi)`` in integration order.
        s: Bicharacteristic parameter of each sample, ``s = (t_0 - t) / (2 tau)``.
        kind: Interior flow or gliding.
        p_drift: Largest ``|p|`` over the samples, relative to ``tau^2``.
        projection_defect: Largest relative ``|p|`` removed by the shell projection.
        event: Boundary phase point ending the segment, if any.
    """

    states: NDArray
    s: NDArray
    kind: SegmentKind
    p_drift: float
    projection_defect: float = 0.0
    event: PhasePoint | None = None

    @property
    def dim(self) -> int:
        return (self.states.shape[-1] - 2) // 2

    @property
    def times(self) -> NDArray:
        return self.states[:, 0]

    @property
    def positions(self) -> NDArray:
        return self.states[:, 1 : 1 + self.dim]

    @property
    def covectors(self) -> NDArray:
        return self.states[:, 2 + self.dim :]

    @property
    def start(self) -> PhasePoint:
        return PhasePoint.from_state(self.states[0])

    @property
    def end(self) -> PhasePoint:
        return PhasePoint.from_state(self.states[-1])

    def samples(self) -> list[tuple[float, PhasePoint]]:
        """``[(s, rho(s)), ...]``."""
        return [(float(s), PhasePoint.from_state(y)) for s, y in zip(self.s, self.states)]


# ------------------------------------------------------------------------------
# Kernels
# ------------------------------------------------------------------------------


def physical_time_field(metric: MetricField, state: StateVector) -> StateVector:
    """``H_p / (-2 tau)``: the Hamiltonian field with ``dt/dt = 1`` (traceable)."""
    _, _, tau, _ = split_state(state)
    return hamiltonian_vector(metric, state) / (-2.0 * tau)


def shell_projection(metric: MetricField, state: StateVector) -> StateVector:
    """Rescale ``xi`` so that ``|xi|_G = |tau|`` (traceable)."""
    d = (state.shape[-1] - 2) // 2
    _, x, tau, xi = split_state(state)
    norm = jnp.sqrt(xi @ metric.g_inv(x) @ xi)
    return state.at[2 + d :].set(xi * jnp.abs(tau) / norm)


def dormand_prince_step(field, y: StateVector, h) -> tuple[StateVector, StateVector]:
    """One Dormand-Prince step; returns the fifth-order state and the error estimate."""
    stages = [field(y)]
    for row in _A[1:]:
        increment = sum(a * k for a, k in zip(row, stages))
        stages.append(field(y + h * increment))
    y5 = y + h * sum(b * k for b, k in zip(_B5, stages))
    stages.append(field(y5))
    err = h * sum((b5 - b4) * k for b5, b4, k in zip(_B5, _B4, stages))
    return y5, err


@functools.lru_cache(maxsize=32)
def _flow_kernels(metric: MetricField, domain: Domain | None, max_samples: int):
    """Jitted while-loop integrator and single projected step for one (metric, domain)."""
    metric.require_dg()

    def field(y):
        return physical_time_field(metric, y)

    def project(y):
        return shell_projection(metric, y)

    def level(y):
        if domain is None:
            return jnp.asarray(1.0)
        _, x, _, _ = split_state(y)
        return jnp.reshape(domain.phi(x), ())

    def relative_symbol(y):
        _, x, tau, xi = split_state(y)
        return jnp.abs(symbol_value(metric, x, tau, xi)) / tau**2

    def projected_step(y, h):
        y5, _ = dormand_prince_step(field, y, h)
        y5 = project(y5)
        return y5, level(y5)

    def run(y0, t_end, h0, rtol, atol, max_step, min_step, tol_event):
        buffer = jnp.zeros((max_samples, y0.shape[0])).at[0].set(y0)
        zero = jnp.zeros((), dtype=y0.dtype)
        init = (
            y0,
            jnp.asarray(h0, dtype=y0.dtype),
            jnp.asarray(1, dtype=jnp.int32),
            buffer,
            jnp.asarray(RUNNING, dtype=jnp.int32),
            zero,
            zero,
        )

        def cond(carry):
            return carry[4] == RUNNING

        def body(carry):
            y, h, count, buffer, _, drift, defect = carry
            remaining = t_end - y[0]
            h = jnp.sign(remaining) * jnp.minimum(
                jnp.minimum(jnp.abs(h), max_step), jnp.abs(remaining)
            )
            y_new, err = dormand_prince_step(field, y, h)
            scale = atol + rtol * jnp.maximum(jnp.abs(y), jnp.abs(y_new))
            err_norm = jnp.sqrt(jnp.mean((err / scale) ** 2))
            accept = err_norm <= 1.0
            factor = jnp.clip(0.9 * jnp.power(jnp.maximum(err_norm, 1e-12), -0.2), 0.2, 5.0)

            y_proj = project(y_new)
            crossed = accept & (level(y_proj) < -tol_event)
            advance = accept & ~crossed

            y_next = jnp.where(advance, y_proj, y)
            buffer = jnp.where(advance, buffer.at[count].set(y_proj), buffer)
            count = count + advance.astype(count.dtype)
            drift = jnp.where(advance, jnp.maximum(drift, relative_symbol(y_proj)), drift)
            defect = jnp.where(advance, jnp.maximum(defect, relative_symbol(y_new)), defect)

            done = advance & (jnp.abs(t_end - y_proj[0]) <= 1e-13 * (1.0 + jnp.abs(t_end)))
            underflow = ~accept & (jnp.abs(h) * factor < min_step)
            status = jnp.select(
                [crossed, done, underflow, count >= max_samples],
                [EVENT, END, UNDERFLOW, FULL],
                default=RUNNING,
            ).astype(jnp.int32)
            h_next = jnp.where(crossed, h, h * factor)
            return (y_next, h_next, count, buffer, status, drift, defect)

        return jax.lax.while_loop(cond, body, init)

    return jax.jit(run), jax.jit(projected_step), jax.jit(level)


# ------------------------------------------------------------------------------
# Integration
# ------------------------------------------------------------------------------


def _locate_event(step, level, y: NDArray, h: float, domain: Domain) -> NDArray:
    """Boundary crossing inside the step ``y -> y + h``, snapped onto the boundary."""

    def crossing(theta):
        return float(step(y, theta * h)[1])

    if float(level(y)) <= 0.0:
        theta = 0.0
    else:
        theta = brentq(crossing, 0.0, 1.0, xtol=1e-15)
    hit = np.asarray(step(y, theta * h)[0])
    d = (hit.shape[0] - 2) // 2
    sigma = domain.project(hit[1 : 1 + d])
    hit[1 : 1 + d] = np.asarray(domain.boundary_point(jnp.asarray(float(sigma))))
    return hit


def integrate_interior(
    metric: MetricField,
    rho0: PhasePoint,
    t_end: float,
    *,
    domain: Domain | None = None,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    max_step: float = DEFAULT_MAX_STEP,
    min_step: float = DEFAULT_MIN_STEP,
    max_samples: int = DEFAULT_MAX_SAMPLES,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> TrajectorySegment:
    """Integrate the ray through ``rho0`` in physical time up to ``t_end``.

    Integration runs backwards when ``t_end < rho0.t``. It stops early when the
    ray leaves ``domain``; the segment then carries the boundary event.

    Raises:
        IntegrationError: On step-size underflow, with the partial segment.
    """
    run, step, level = _flow_kernels(metric, domain, max_samples)
    y = jnp.asarray(rho0.to_state())
    t0, tau = float(rho0.t), float(rho0.tau)
    h = float(np.sign(t_end - t0)) * min(max_step, 0.01)

    chunks = [np.asarray(y)[None]]
    drift, defect = 0.0, 0.0
    while True:
        y, h, count, buffer, status, chunk_drift, chunk_defect = run(
            y, t_end, h, rtol, atol, max_step, min_step, tolerances.tol_event
        )
        chunks.append(np.asarray(buffer[1 : int(count)]))
        drift = max(drift, float(chunk_drift))
        defect = max(defect, float(chunk_defect))
        if int(status) != FULL:
            break
    status = int(status)

    event = None
    if status == EVENT:
        hit = _locate_event(step, level, np.asarray(y), float(h), domain)
        chunks.append(hit[None])
        event = PhasePoint.from_state(hit)

    states = np.concatenate(chunks, axis=0)
    segment = TrajectorySegment(
        states=states,
        s=(t0 - states[:, 0]) / (2.0 * tau),
        kind=SegmentKind.INTERIOR,
        p_drift=drift,
        projection_defect=defect,
        event=event,
    )
    if status == UNDERFLOW:
        msg = f"step size underflow at t={float(y[0]):.6g} after {states.shape[0]} samples"
        raise IntegrationError(msg, partial=segment)
    logger.debug(
        f"interior segment: {states.shape[0]} samples, t in "
        f"[{states[0, 0]:.4g}, {states[-1, 0]:.4g}], event={event is not None}"
    )
    return segment


def flow_interior(
    metric: MetricField,
    rho0: PhasePoint,
    s_span: float,
    *,
    domain: Domain | None = None,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
    **kwargs,
) -> TrajectorySegment:
    """Follow ``d/ds rho = H_p(rho)`` from ``rho0`` for a parameter length ``s_span``.

    Args:
        metric: The metric field (with a derivative oracle).
        rho0: Characteristic initial point in the interior.
        s_span: Length of the parameter interval; physical time moves by
            ``-2 tau s_span``.
        domain: Stop at the first boundary event of this domain when given.
        tolerances: Shared tolerances (``tol_p``, ``tol_event``).
        **kwargs: Integrator options forwarded to `integrate_interior`.

    Returns:
        The sampled segment.

    Raises:
        PreconditionError: If ``rho0`` is outside the domain or off the shell.
        IntegrationError: On step-size underflow.
    """
    if domain is not None and not domain.contains(rho0.x, tol=tolerances.tol_event):
        msg = f"flow_interior needs an interior starting point, got x={np.asarray(rho0.x).tolist()}"
        raise PreconditionError(msg)
    p_value = float(
        symbol_value(
            metric,
            jnp.asarray(rho0.x, dtype=float),
            jnp.asarray(rho0.tau, dtype=float),
            jnp.asarray(rho0.xi, dtype=float),
        )
    )
    if abs(p_value) > tolerances.tol_p * max(rho0.tau**2, 1.0):
        msg = f"initial point is not characteristic: p(rho0)={p_value:.3e}"
        raise PreconditionError(msg)
    if rho0.tau == 0:
        msg = "tau = 0 gives no time evolution"
        raise PreconditionError(msg)
    t_end = rho0.t - 2.0 * rho0.tau * s_span
    return integrate_interior(metric, rho0, t_end, domain=domain, tolerances=tolerances, **kwargs)
