"""Pointwise boundary laws: classification, hyperbolic lifts, reflection, gliding.

All quantities are read off in the quasi-normal collar chart at ``z = 0``:
``zeta = n_g . xi``, ``p(pi_par rho) = -tau^2 + |xi|_G^2 - zeta^2`` and
``H_p z = 2 zeta``. ``H_p^2 z`` is the finite difference of ``H_p phi`` along
``H_p`` divided by ``d phi / dz``; both agree at glancing points, where the
value is used.
"""

import dataclasses
import functools
from dataclasses import dataclass

import jax
import jax.numpy as jnp
import numpy as np

from gcckit.enums import BoundaryTag, EscapeDirection
from gcckit.errors import ClassificationError, PreconditionError
from gcckit.geometry.collar import BoundaryFrame, ChartPoint, CollarChart
from gcckit.geometry.hamiltonian import PhasePoint, hamiltonian_vector, split_state
from gcckit.types import Array, StateVector, TangentVector

DEFAULT_BOUNDARY_TOLERANCE = 1e-7

HYPERBOLIC_TAGS = (BoundaryTag.HYPERBOLIC_PLUS, BoundaryTag.HYPERBOLIC_MINUS)
GLANCING_TAGS = (
    BoundaryTag.GLANCING_DIFFRACTIVE,
    BoundaryTag.GLANCING_GLIDING,
    BoundaryTag.GLANCING_ORDER3,
)


@dataclass(frozen=True)
class BoundaryClass:
    """Classification of a boundary phase point.

    Attributes:
        tag: Boundary class.
        p_parallel: ``p`` of the tangential projection.
        hpz: ``H_p z = 2 zeta``.
        hp2z: ``H_p^2 z``.
        zeta: Normal covector component.
        sigma: Boundary parameter of the base point.
        eps_cls: Glancing band used for the classification.
        carrier: True when ``rho`` is not characteristic, i.e. a point of the
            boundary cotangent bundle rather than one of its lifts. Hyperbolic
            carriers with ``zeta = 0`` are tagged ``HyperbolicPlus``.
    """

    tag: BoundaryTag
    p_parallel: float
    hpz: float
    hp2z: float
    zeta: float
    sigma: float
    eps_cls: float
    carrier: bool = False

    @property
    def is_hyperbolic(self) -> bool:
        return self.tag in HYPERBOLIC_TAGS

    @property
    def is_glancing(self) -> bool:
        return self.tag in GLANCING_TAGS


# ------------------------------------------------------------------------------
# Kernels
# ------------------------------------------------------------------------------


@functools.lru_cache(maxsize=32)
def _normal_kernels(chart: CollarChart):
    """Jitted ``H_p phi`` and ``grad phi`` for a chart."""
    metric, domain = chart.metric, chart.domain

    def phi_scalar(x):
        return jnp.reshape(domain.phi(x), ())

    grad_phi = jax.grad(phi_scalar)

    def hp_phi(state):
        _, x, _, xi = split_state(state)
        return grad_phi(x) @ (2.0 * metric.g_inv(x) @ xi)

    def hp2_phi(state, step):
        field = hamiltonian_vector(metric, state)
        return (hp_phi(state + step * field) - hp_phi(state - step * field)) / (2.0 * step)

    return jax.jit(hp2_phi), jax.jit(grad_phi)


def second_normal_derivative(
    chart: CollarChart, rho: PhasePoint, frame: BoundaryFrame | None = None
) -> float:
    """``H_p^2 z`` at a boundary phase point."""
    if frame is None:
        frame = chart.frame(chart.inverse(rho.x)[0])
    hp2_phi, grad_phi = _normal_kernels(chart)
    step = chart.tolerances.hp2z_step
    value = float(hp2_phi(rho.to_state(), step))
    dphi_dz = float(np.dot(np.asarray(grad_phi(jnp.asarray(frame.point))), frame.n_g))
    return value / dphi_dz


def gliding_vector(
    chart: CollarChart, state: StateVector, dz: Array, hp2z: Array
) -> TangentVector:
    """``H_p - (H_p^2 z / 2) d/dzeta`` on a packed state (traceable)."""
    field = hamiltonian_vector(chart.metric, state)
    d = chart.dim
    return field.at[2 + d :].add(-0.5 * hp2z * dz)


# ------------------------------------------------------------------------------
# Operations
# ------------------------------------------------------------------------------


def _boundary_frame(chart: CollarChart, rho: PhasePoint, tol: float) -> BoundaryFrame:
    sigma, z = chart.inverse(rho.x)
    if abs(z) > tol:
        msg = f"phase point at x={np.asarray(rho.x).tolist()} is not on the boundary (z={z:.3e})"
        raise PreconditionError(msg)
    return chart.frame(sigma)


def classify(
    chart: CollarChart, rho: PhasePoint, *, tol: float = DEFAULT_BOUNDARY_TOLERANCE
) -> BoundaryClass:
    """Classify a boundary phase point.

    Elliptic if ``p_par > eps_cls``, hyperbolic if ``p_par < -eps_cls`` (plus or
    minus by the sign of ``zeta``), glancing otherwise; glancing points are
    diffractive, gliding or of order 3 according to ``H_p^2 z`` against
    ``eps_d``.

    Args:
        chart: The collar chart.
        rho: A phase point over the boundary.
        tol: Largest accepted ``|z|`` of the base point.

    Returns:
        The classification.

    Raises:
        PreconditionError: If ``rho`` does not lie over the boundary.
    """
    frame = _boundary_frame(chart, rho, tol)
    tolerances = chart.tolerances
    xi = np.asarray(rho.xi, dtype=float)
    g_inv = np.asarray(chart.metric.g_inv(jnp.asarray(frame.point)))
    zeta = frame.zeta(xi)
    norm_sq = float(xi @ g_inv @ xi)
    p_parallel = -(rho.tau**2) + norm_sq - zeta**2
    eps_cls = tolerances.eps_cls_rel * (rho.tau**2 + float(xi @ xi))
    p_value = -(rho.tau**2) + norm_sq
    carrier = abs(p_value) > max(eps_cls, tolerances.tol_p * (rho.tau**2 + 1.0))
    hp2z = second_normal_derivative(chart, rho, frame)

    if p_parallel > eps_cls:
        tag = BoundaryTag.ELLIPTIC
    elif p_parallel < -eps_cls:
        tag = BoundaryTag.HYPERBOLIC_MINUS if zeta < 0 else BoundaryTag.HYPERBOLIC_PLUS
    elif hp2z > tolerances.eps_d:
        tag = BoundaryTag.GLANCING_DIFFRACTIVE
    elif hp2z < -tolerances.eps_d:
        tag = BoundaryTag.GLANCING_GLIDING
    else:
        tag = BoundaryTag.GLANCING_ORDER3

    return BoundaryClass(
        tag=tag,
        p_parallel=float(p_parallel),
        hpz=2.0 * zeta,
        hp2z=hp2z,
        zeta=zeta,
        sigma=frame.sigma,
        eps_cls=eps_cls,
        carrier=bool(carrier),
    )


def hyperbolic_lift(
    chart: CollarChart, rho: PhasePoint, *, tol: float = DEFAULT_BOUNDARY_TOLERANCE
) -> tuple[PhasePoint, PhasePoint]:
    """The two characteristic lifts ``(rho_minus, rho_plus)`` of a hyperbolic point.

    ``zeta_pm = +-sqrt(-p(pi_par rho))``; the tangential part of ``xi`` and ``tau``
    are kept.

    Raises:
        ClassificationError: If the tangential projection is not hyperbolic.
    """
    cls = classify(chart, rho, tol=tol)
    if not cls.is_hyperbolic:
        msg = f"hyperbolic_lift needs a hyperbolic point, got {cls.tag}"
        raise ClassificationError(msg)
    frame = chart.frame(cls.sigma)
    root = float(np.sqrt(-cls.p_parallel))
    xi = np.asarray(rho.xi, dtype=float)
    minus = rho.replace(xi=xi + (-root - cls.zeta) * frame.dz)
    plus = rho.replace(xi=xi + (root - cls.zeta) * frame.dz)
    return minus, plus


def reflect(
    chart: CollarChart,
    rho: PhasePoint | ChartPoint,
    *,
    tol: float = DEFAULT_BOUNDARY_TOLERANCE,
) -> PhasePoint | ChartPoint:
    """The boundary involution ``zeta -> -zeta``.

    On a `ChartPoint` only ``zeta`` changes sign, so ``tau`` and ``xi'`` are
    bit-identical and the map is an exact involution. On a Cartesian
    `PhasePoint` it is ``xi -> xi - 2 zeta dz``.

    Raises:
        PreconditionError: If the point does not lie over the boundary.
    """
    if isinstance(rho, ChartPoint):
        if abs(rho.z) > tol:
            msg = f"chart point has z={rho.z:.3e}, not on the boundary"
            raise PreconditionError(msg)
        return dataclasses.replace(rho, zeta=-rho.zeta)
    frame = _boundary_frame(chart, rho, tol)
    xi = np.asarray(rho.xi, dtype=float)
    return rho.replace(xi=xi - 2.0 * frame.zeta(xi) * frame.dz)


def gliding_field(
    chart: CollarChart, rho: PhasePoint, *, tol: float = DEFAULT_BOUNDARY_TOLERANCE
) -> TangentVector:
    """The gliding vector field ``H_p + (H_p^2 z / H_z^2 p) H_z`` at a glancing point.

    ``H_z^2 p = 2`` in the quasi-normal chart and ``H_z = -d/dzeta``.

    Raises:
        ClassificationError: If ``rho`` is not glancing with ``zeta = 0``.
    """
    cls = classify(chart, rho, tol=tol)
    if not cls.is_glancing or cls.zeta**2 > cls.eps_cls:
        msg = f"gliding_field needs a glancing point with zeta = 0, got {cls.tag} (zeta={cls.zeta:.3e})"
        raise ClassificationError(msg)
    frame = chart.frame(cls.sigma)
    return gliding_vector(chart, rho.to_state(), jnp.asarray(frame.dz), jnp.asarray(cls.hp2z))


def is_escape_point(
    boundary_class: BoundaryClass, direction: EscapeDirection | str
) -> bool | None:
    """Escape-set membership of a classified boundary point.

    Directions refer to the bicharacteristic parameter. Returns None for
    order-3 glancing points, whose membership is not decided pointwise.
    """
    direction = EscapeDirection(direction)
    tag = boundary_class.tag
    if tag == BoundaryTag.HYPERBOLIC_MINUS:
        return direction == EscapeDirection.FUTURE
    if tag == BoundaryTag.HYPERBOLIC_PLUS:
        return direction == EscapeDirection.PAST
    if tag == BoundaryTag.GLANCING_GLIDING:
        return True
    if tag == BoundaryTag.GLANCING_ORDER3:
        return None
    return False
