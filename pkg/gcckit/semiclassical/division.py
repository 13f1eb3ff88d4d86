"""Euclidean division of symbols by a quadratic polynomial in ``zeta``.

For ``p = p2 zeta^2 + p1 zeta + p0`` with roots ``zeta+-`` the decomposition
``chi b = b0 + b1 zeta + q p`` is obtained by Lagrange interpolation of
``chi b`` at the roots:

    b1 = (b(zeta+) - b(zeta-)) / (zeta+ - zeta-),   b0 = b(zeta+) - b1 zeta+.

At a double root ``b1`` is the ``zeta``-derivative of ``chi b`` there. The
quotient is evaluated as ``(chi b - b0 - b1 zeta) / p`` away from the roots and
by its L'Hopital limit inside a band around them.
"""

from dataclasses import dataclass

import jax
import jax.numpy as jnp
import numpy as np
from loguru import logger

from gcckit.errors import UnsupportedSymbolError
from gcckit.types import Array, Callable, NDArray, Report

DEFAULT_ROOT_CONDITIONING = 1e-6
DEFAULT_ROOT_BAND = 1e-3
QUADRATIC_TOLERANCE = 1e-8

# (y, eta, zeta) -> value, broadcasting over leading axes
BoundarySymbol = Callable[[Array, Array, Array], Array]


@dataclass(frozen=True, eq=False)
class DivisionResult:
    """Remainder coefficients, quotient samples and the audit residual.

    Attributes:
        b0: ``b0(y, eta')`` per point.
        b1: ``b1(y, eta')`` per point.
        q: Quotient on the ``(point, zeta)`` evaluation grid.
        residual: ``chi b - b0 - b1 zeta - q p`` on the same grid.
        roots: ``(zeta+, zeta-)`` per point (complex in the elliptic region).
        confluent: Points where the derivative rule was used.
        near_root: Grid entries inside the root band.
    """

    b0: NDArray
    b1: NDArray
    q: NDArray
    residual: NDArray
    roots: NDArray
    confluent: NDArray
    near_root: NDArray

    def to_dict(self) -> Report:
        away = np.abs(self.residual[~self.near_root])
        return {
            "max_residual_away": float(away.max()) if away.size else 0.0,
            "max_residual_band": float(np.abs(self.residual[self.near_root]).max()) if self.near_root.any() else 0.0,
            "confluent_points": int(self.confluent.sum()),
        }


def quadratic_coefficients(p: BoundarySymbol, y: Array, eta: Array, *, tol: float = QUADRATIC_TOLERANCE) -> tuple:
    """``(p2, p1, p0)`` from ``p`` at ``zeta = 0, 1, -1``, checked at ``zeta = 2``.

    Raises:
        UnsupportedSymbolError: If ``p`` is not quadratic in ``zeta``.
    """

    def at(zeta):
        return jnp.asarray(p(y, eta, jnp.full(jnp.shape(y)[:-1], zeta)))

    p0, plus, minus, two = at(0.0), at(1.0), at(-1.0), at(2.0)
    p2 = 0.5 * (plus + minus) - p0
    p1 = 0.5 * (plus - minus)
    cubic = two - (4 * p2 + 2 * p1 + p0)
    scale = 1.0 + jnp.abs(p0) + jnp.abs(p1) + jnp.abs(p2)
    if bool(jnp.any(jnp.abs(cubic) > tol * scale)) or bool(jnp.any(p2 == 0)):
        msg = "the symbol p is not a quadratic polynomial in zeta with non-vanishing leading coefficient"
        raise UnsupportedSymbolError(msg)
    return p2, p1, p0


def _zeta_derivative(f: BoundarySymbol, order: int) -> BoundarySymbol:
    for _ in range(order):
        f = _one_derivative(f)
    return f


def _one_derivative(f: BoundarySymbol) -> BoundarySymbol:
    def derivative(y, eta, zeta):
        zeta = jnp.asarray(zeta)
        return jax.jvp(lambda z: f(y, eta, z), (zeta,), (jnp.ones_like(zeta),))[1]

    return derivative


def euclidean_divide(
    b: BoundarySymbol,
    p: BoundarySymbol,
    y: Array,
    eta: Array,
    zeta: Array,
    *,
    chi: Callable[[Array, Array], Array] | None = None,
    conditioning: float = DEFAULT_ROOT_CONDITIONING,
    band: float = DEFAULT_ROOT_BAND,
) -> DivisionResult:
    """Divide ``chi b`` by ``p`` in ``zeta``.

    Args:
        b: Symbol ``b(y, eta', zeta)``; must accept complex ``zeta`` where the
            roots are complex.
        p: Quadratic symbol in ``zeta``.
        y: Base points ``(n, dy)``.
        eta: Tangential dual variables ``(n, de)``.
        zeta: Evaluation grid ``(m,)`` for the quotient.
        chi: Cutoff ``chi(y, eta')`` (1 by default).
        conditioning: Relative root separation below which the double-root rule
            is used.
        band: Relative ``|p|`` below which the quotient uses its limit formula.

    Returns:
        The division result.
    """
    y = jnp.atleast_2d(jnp.asarray(y, dtype=float))
    eta = jnp.atleast_2d(jnp.asarray(eta, dtype=float))
    zeta = jnp.asarray(zeta, dtype=float)
    p2, p1, p0 = quadratic_coefficients(p, y, eta)
    cut = jnp.ones(y.shape[0]) if chi is None else jnp.asarray(chi(y, eta))

    root = jnp.sqrt((p1**2 - 4 * p2 * p0).astype(complex))
    plus, minus = (-p1 + root) / (2 * p2), (-p1 - root) / (2 * p2)
    confluent = jnp.abs(plus - minus) <= conditioning * (1.0 + jnp.abs(plus))
    center = jnp.where(confluent, 0.5 * (plus + minus), plus)
    safe_minus = jnp.where(confluent, center - 1.0, minus)

    b_plus, b_minus = b(y, eta, center), b(y, eta, safe_minus)
    b_center_slope = _one_derivative(b)(y, eta, center)
    b1 = cut * jnp.where(confluent, b_center_slope, (b_plus - b_minus) / (center - safe_minus))
    b0 = cut * b_plus - b1 * center

    # quotient on the (point, zeta) grid
    yy = jnp.broadcast_to(y[:, None, :], (y.shape[0], zeta.shape[0], y.shape[1]))
    ee = jnp.broadcast_to(eta[:, None, :], (eta.shape[0], zeta.shape[0], eta.shape[1]))
    zz = jnp.broadcast_to(zeta[None, :], (y.shape[0], zeta.shape[0]))
    p_values = p(yy, ee, zz)
    numerator = cut[:, None] * b(yy, ee, zz) - b0[:, None] - b1[:, None] * zz
    scale = 1.0 + jnp.abs(p2)[:, None] * (1.0 + zz**2)
    near = jnp.abs(p_values) <= band * scale
    safe_p = jnp.where(near, 1.0, p_values)
    p_slope = _one_derivative(p)(yy, ee, zz)
    flat = jnp.abs(p_slope) <= conditioning * scale
    first = (cut[:, None] * _one_derivative(b)(yy, ee, zz) - b1[:, None]) / jnp.where(flat, 1.0, p_slope)
    second = cut[:, None] * _zeta_derivative(b, 2)(yy, ee, zz) / (2 * p2[:, None])
    limit = jnp.where(confluent[:, None] | flat, second, first)
    q = jnp.where(near, limit, numerator / safe_p)
    residual = cut[:, None] * b(yy, ee, zz) - b0[:, None] - b1[:, None] * zz - q * p_values

    if bool(jnp.any(confluent)):
        logger.debug(f"Euclidean division used the double-root rule at {int(jnp.sum(confluent))} points")
    return DivisionResult(
        np.asarray(b0),
        np.asarray(b1),
        np.asarray(q),
        np.asarray(residual),
        np.stack([np.asarray(plus), np.asarray(minus)], axis=-1),
        np.asarray(confluent),
        np.asarray(near),
    )
