"""The wave symbol ``p = -tau^2 + |xi|_x^2`` and its Hamiltonian vector field.

Phase points are stored in Cartesian coordinates. Arrays packed as
``state = (t, x_1..x_d, tau, xi_1..xi_d)`` are what the jitted integrators carry
around; `PhasePoint` is the user-facing view of the same data.
"""

from dataclasses import dataclass

import jax
import jax.numpy as jnp
import numpy as np

from gcckit.geometry.domain import Domain
from gcckit.geometry.metric import MetricField
from gcckit.types import Array, Covector, Point, StateVector, TangentVector


@dataclass(frozen=True)
class PhasePoint:
    """A point ``rho = (t, x; tau, xi)`` of the cotangent bundle of space-time."""

    t: float
    x: Point
    tau: float
    xi: Covector

    @property
    def dim(self) -> int:
        return int(np.shape(self.x)[-1])

    def to_state(self) -> StateVector:
        """Pack into ``(t, x, tau, xi)``."""
        return jnp.concatenate([
            jnp.atleast_1d(jnp.asarray(self.t, dtype=float)),
            jnp.asarray(self.x, dtype=float),
            jnp.atleast_1d(jnp.asarray(self.tau, dtype=float)),
            jnp.asarray(self.xi, dtype=float),
        ])

    @classmethod
    def from_state(cls, state: StateVector) -> "PhasePoint":
        """Unpack ``(t, x, tau, xi)``."""
        state = np.asarray(state, dtype=float)
        d = (state.shape[-1] - 2) // 2
        return cls(
            t=float(state[0]),
            x=state[1 : 1 + d],
            tau=float(state[1 + d]),
            xi=state[2 + d :],
        )

    def replace(self, **changes) -> "PhasePoint":
        values = {"t": self.t, "x": self.x, "tau": self.tau, "xi": self.xi}
        values.update(changes)
        return PhasePoint(**values)

    def __repr__(self) -> str:
        x = np.round(np.asarray(self.x, dtype=float), 6).tolist()
        xi = np.round(np.asarray(self.xi, dtype=float), 6).tolist()
        return f"PhasePoint(t={self.t:.6g}, x={x}, tau={self.tau:.6g}, xi={xi})"


jax.tree_util.register_pytree_node(
    PhasePoint,
    lambda rho: ((rho.t, rho.x, rho.tau, rho.xi), None),
    lambda _, children: PhasePoint(*children),
)


def split_state(state: StateVector) -> tuple[Array, Point, Array, Covector]:
    """``state -> (t, x, tau, xi)`` for packed arrays (traceable)."""
    d = (state.shape[-1] - 2) // 2
    return state[..., 0], state[..., 1 : 1 + d], state[..., 1 + d], state[..., 2 + d :]


# ------------------------------------------------------------------------------
# Symbol and Hamiltonian field on packed states
# ------------------------------------------------------------------------------


def symbol_value(metric: MetricField, x: Point, tau: Array, xi: Covector) -> Array:
    """``-tau^2 + g^ij(x) xi_i xi_j`` (traceable)."""
    return -(tau**2) + xi @ metric.g_inv(x) @ xi


def hamiltonian_vector(metric: MetricField, state: StateVector) -> TangentVector:
    """``H_p`` at a packed state, packed the same way (traceable)."""
    _, x, tau, xi = split_state(state)
    dg = metric.require_dg()
    return jnp.concatenate([
        jnp.atleast_1d(-2.0 * tau),
        2.0 * metric.g_inv(x) @ xi,
        jnp.zeros(1),
        -jnp.einsum("kij,i,j->k", dg(x), xi, xi),
    ])


# ------------------------------------------------------------------------------
# Public operations
# ------------------------------------------------------------------------------


def wave_symbol(
    metric: MetricField, rho: PhasePoint, domain: Domain | None = None
) -> float:
    """Evaluate the wave symbol ``p(rho) = -tau^2 + |xi|_x^2``.

    Args:
        metric: The metric field.
        rho: The phase point.
        domain: When given, ``rho.x`` must lie in its closure.

    Returns:
        The value of ``p``.

    Raises:
        DomainError: If ``rho.x`` lies outside the closure of ``domain``.
    """
    if domain is not None:
        domain.check_contains(rho.x)
    x = jnp.asarray(rho.x, dtype=float)
    xi = jnp.asarray(rho.xi, dtype=float)
    return float(symbol_value(metric, x, jnp.asarray(rho.tau, dtype=float), xi))


def hamiltonian_field(
    metric: MetricField, rho: PhasePoint, domain: Domain | None = None
) -> TangentVector:
    """The Hamiltonian vector field of ``p`` at ``rho``.

    Returns ``(dt, dx, dtau, dxi) = (-2 tau, 2 g^ij xi_i e_j, 0,
    -d_k g^ij xi_i xi_j e_k)`` packed as one array of length ``2 d + 2``.

    Raises:
        ConfigurationError: If the metric has no derivative oracle.
        DomainError: If ``domain`` is given and ``rho.x`` lies outside it.
    """
    if domain is not None:
        domain.check_contains(rho.x)
    return hamiltonian_vector(metric, rho.to_state())


def phase_point_from_direction(
    metric: MetricField,
    x: Point,
    direction: Point,
    *,
    tau: float = 1.0,
    t: float = 0.0,
) -> PhasePoint:
    """Characteristic phase point whose ray moves along ``direction`` as t grows.

    The direction is normalised to g-unit length ``v`` and the covector is
    ``xi = -tau g(x) v``, for which ``dx/dt = v`` and ``p = 0``.
    """
    x = jnp.asarray(x, dtype=float)
    v = jnp.asarray(direction, dtype=float)
    g = metric.g(x)
    v = v / jnp.sqrt(v @ g @ v)
    return PhasePoint(t=float(t), x=np.asarray(x), tau=float(tau), xi=np.asarray(-tau * g @ v))


def velocity(metric: MetricField, rho: PhasePoint) -> Point:
    """``dx/dt`` of the ray through ``rho`` (``-g^ij xi_j / tau``)."""
    x = jnp.asarray(rho.x, dtype=float)
    return np.asarray(-metric.g_inv(x) @ jnp.asarray(rho.xi, dtype=float) / rho.tau)


def project_to_shell(metric: MetricField, rho: PhasePoint) -> PhasePoint:
    """Rescale ``xi`` (keeping its direction) so that ``p(rho) = 0``."""
    x = jnp.asarray(rho.x, dtype=float)
    xi = jnp.asarray(rho.xi, dtype=float)
    norm = jnp.sqrt(xi @ metric.g_inv(x) @ xi)
    return rho.replace(xi=np.asarray(xi * abs(rho.tau) / norm))


def time_reverse(rho: PhasePoint) -> PhasePoint:
    """Physical time reversal ``(t, x, tau, xi) -> (-t, x, -tau, xi)``.

    The ray through the image retraces the ray through ``rho`` backwards.
    """
    return rho.replace(t=-rho.t, tau=-rho.tau)


def flip_covector(rho: PhasePoint) -> PhasePoint:
    """``(tau, xi) -> (-tau, -xi)``: the same spatial ray, with ``tau`` of opposite sign.

    This is why sampling ``tau = +1`` covers every characteristic direction.
    """
    return rho.replace(tau=-rho.tau, xi=-np.asarray(rho.xi))
