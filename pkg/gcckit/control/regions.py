"""Observation regions.

A region is described by a level function that is positive exactly on the
(open) region: a function of ``x`` for interior regions, of the boundary
parameter ``sigma`` for boundary regions. The weak condition uses the
``dilation``-neighbourhood ``{level > -dilation}``.
"""

import dataclasses
from dataclasses import dataclass

import jax.numpy as jnp
import numpy as np

from gcckit.enums import RegionKind
from gcckit.errors import ConfigurationError
from gcckit.expressions import spatial_field
from gcckit.geometry.domain import Domain
from gcckit.types import Array, Callable, Sequence


@dataclass(frozen=True, eq=False)
class ObservationRegion:
    """An interior set ``omega`` or a boundary set ``Gamma``.

    Attributes:
        kind: Interior or boundary.
        level: Positive inside; ``x -> value`` (batched over leading axes) or
            ``sigma -> value``.
        width: Smallest thickness of the region, used to pick the sub-sampling
            resolution of trajectories.
        dilation: Radius of the neighbourhood used by the weak condition.
        name: Description for reports.
    """

    kind: RegionKind
    level: Callable[[Array], Array]
    width: float
    dilation: float = 0.0
    name: str = ""

    def values(self, points: Array) -> np.ndarray:
        """Level values at a batch of points (or boundary parameters)."""
        return np.asarray(self.level(jnp.asarray(points, dtype=float)))

    def contains(self, point: Array, *, dilated: bool = False) -> bool:
        """Membership of one point, in the dilated region when asked."""
        threshold = -self.dilation if dilated else 0.0
        return bool(np.all(self.values(point) > threshold))

    def dilate(self, dilation: float) -> "ObservationRegion":
        if dilation < 0:
            msg = f"dilation must be non-negative, got {dilation}"
            raise ConfigurationError(msg)
        return dataclasses.replace(self, dilation=float(dilation))


# ------------------------------------------------------------------------------
# Interior regions
# ------------------------------------------------------------------------------


def create_interval_region(a: float, b: float, **kwargs) -> ObservationRegion:
    """``omega = (a, b)`` on the line."""
    if not b > a:
        msg = f"empty region ({a}, {b})"
        raise ConfigurationError(msg)

    def level(x):
        x = jnp.asarray(x)[..., 0]
        return jnp.minimum(x - a, b - x)

    return ObservationRegion(
        RegionKind.INTERIOR, level, b - a, kwargs.get("dilation", 0.0), f"({a}, {b})"
    )


def create_strip_region(
    axis: int, lo: float = -np.inf, hi: float = np.inf, **kwargs
) -> ObservationRegion:
    """``omega = {lo < x_axis < hi}``; one of the bounds may be infinite."""
    if not hi > lo:
        msg = f"empty strip {lo} < x{axis + 1} < {hi}"
        raise ConfigurationError(msg)

    def level(x):
        coordinate = jnp.asarray(x)[..., axis]
        return jnp.minimum(coordinate - lo, hi - coordinate)

    width = hi - lo if np.isfinite(hi - lo) else kwargs.get("width", 1.0)
    return ObservationRegion(
        RegionKind.INTERIOR,
        level,
        float(width),
        kwargs.get("dilation", 0.0),
        f"{lo} < x{axis + 1} < {hi}",
    )


def create_box_region(lo: Sequence[float], hi: Sequence[float], **kwargs) -> ObservationRegion:
    """An axis-aligned open box."""
    lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
    if np.any(hi <= lo):
        msg = f"empty box {lo.tolist()} -> {hi.tolist()}"
        raise ConfigurationError(msg)

    def level(x):
        x = jnp.asarray(x)
        return jnp.min(jnp.minimum(x - lo, hi - x), axis=-1)

    return ObservationRegion(
        RegionKind.INTERIOR,
        level,
        float(np.min(hi - lo)),
        kwargs.get("dilation", 0.0),
        f"box({lo.tolist()}, {hi.tolist()})",
    )


def create_ball_region(center: Sequence[float], radius: float, **kwargs) -> ObservationRegion:
    """An open Euclidean ball."""
    c = jnp.asarray(center, dtype=float)
    if radius <= 0:
        msg = f"non-positive radius {radius}"
        raise ConfigurationError(msg)

    def level(x):
        return radius - jnp.linalg.norm(jnp.asarray(x) - c, axis=-1)

    return ObservationRegion(
        RegionKind.INTERIOR,
        level,
        2.0 * radius,
        kwargs.get("dilation", 0.0),
        f"ball({list(center)}, {radius})",
    )


def create_expression_region(text: str, dim: int, *, width: float = 0.1, **kwargs) -> ObservationRegion:
    """``omega = {f > 0}`` for an expression ``f`` in ``x1, x2``."""
    return ObservationRegion(
        RegionKind.INTERIOR,
        spatial_field(text, dim, key="region.expression"),
        width,
        kwargs.get("dilation", 0.0),
        f"{{{text} > 0}}",
    )


def create_whole_region(domain: Domain, **kwargs) -> ObservationRegion:
    """The whole domain (positive on its closure)."""

    def level(x):
        return domain.phi(x) + 1.0

    extent = min(hi - lo for lo, hi in domain.bounding_box)
    return ObservationRegion(
        RegionKind.INTERIOR, level, float(extent), kwargs.get("dilation", 0.0), "whole domain"
    )


# ------------------------------------------------------------------------------
# Boundary regions
# ------------------------------------------------------------------------------


def create_arc_region(
    domain: Domain, start: float, stop: float, **kwargs
) -> ObservationRegion:
    """Boundary arc ``start < sigma < stop`` (wrapping for periodic boundaries)."""
    period = domain.boundary_length
    length = (stop - start) % period if domain.periodic else stop - start
    if length <= 0:
        msg = f"empty boundary arc ({start}, {stop})"
        raise ConfigurationError(msg)
    center, half = start + 0.5 * length, 0.5 * length

    def level(sigma):
        gap = jnp.abs(jnp.asarray(sigma) - center)
        if domain.periodic:
            gap = jnp.mod(gap, period)
            gap = jnp.minimum(gap, period - gap)
        return half - gap

    return ObservationRegion(
        RegionKind.BOUNDARY, level, float(length), kwargs.get("dilation", 0.0), f"arc({start}, {stop})"
    )


def create_full_boundary_region(domain: Domain, **kwargs) -> ObservationRegion:
    """The whole boundary."""

    def level(sigma):
        return jnp.ones_like(jnp.asarray(sigma, dtype=float))

    return ObservationRegion(
        RegionKind.BOUNDARY,
        level,
        float(domain.boundary_length),
        kwargs.get("dilation", 0.0),
        "full boundary",
    )


def create_endpoint_region(domain: Domain, sigmas: Sequence[float], **kwargs) -> ObservationRegion:
    """A finite set of boundary parameters, e.g. endpoints of an interval."""
    points = jnp.asarray(sigmas, dtype=float)
    if points.size == 0:
        msg = "endpoint region needs at least one point"
        raise ConfigurationError(msg)

    def level(sigma):
        sigma = jnp.asarray(sigma)[..., None]
        return 0.5 - jnp.min(jnp.abs(sigma - points), axis=-1)

    return ObservationRegion(
        RegionKind.BOUNDARY,
        level,
        1.0,
        kwargs.get("dilation", 0.0),
        f"points({[float(s) for s in sigmas]})",
    )


REGION_FACTORIES = {
    "interval": create_interval_region,
    "strip": create_strip_region,
    "box": create_box_region,
    "ball": create_ball_region,
    "expression": create_expression_region,
    "whole": create_whole_region,
    "arc": create_arc_region,
    "boundary": create_full_boundary_region,
    "endpoints": create_endpoint_region,
}


def create_region(shape: str, *args, **kwargs) -> ObservationRegion:
    """Create a region by shape name.

    Raises:
        ConfigurationError: If the shape is unknown.
    """
    if shape not in REGION_FACTORIES:
        msg = f"unknown region shape {shape!r}; known: {sorted(REGION_FACTORIES)}"
        raise ConfigurationError(msg)
    return REGION_FACTORIES[shape](*args, **kwargs)
