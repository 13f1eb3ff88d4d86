"""Planar domains described by a level set and an arc-length boundary chart.

Every domain carries

- a level-set function ``phi`` with ``phi > 0`` inside and ``|grad phi| > 0`` on
  the boundary (for the built-in domains ``phi`` is the Euclidean distance to the
  boundary near the boundary),
- an arc-length parameterisation ``sigma -> q(sigma)`` of the boundary together
  with the Euclidean inward unit normal ``nu(sigma)`` (in 1D, ``sigma`` indexes
  the endpoints),
- a closest-point map ``project(x) -> sigma``.

``q`` and ``nu`` are written in ``jax.numpy`` so the collar chart built on top of
them can be differentiated.
"""

import math
from dataclasses import dataclass, field

import jax
import jax.numpy as jnp
import numpy as np
from loguru import logger

from gcckit.enums import DomainKind
from gcckit.errors import DomainError
from gcckit.types import Array, Callable, Float, NDArray, Point

DEFAULT_COLLAR_WIDTH = 0.2
DEFAULT_LEVEL_SET_SAMPLES = 256
DEFAULT_HALF_PLANE_EXTENT = 2.0


@dataclass(frozen=True, eq=False)
class Domain:
    """A bounded (or collar-bounded) domain of dimension 1 or 2.

    Attributes:
        kind: Which family the domain belongs to.
        dim: Spatial dimension.
        phi: Level-set function, positive inside.
        bounding_box: Axis-aligned box ``((lo_1, hi_1), ...)`` containing the domain.
        boundary_length: Length of the parameter range of ``sigma`` (number of
            endpoints in 1D).
        periodic: Whether ``sigma`` is periodic with period ``boundary_length``.
        corners: Parameter values of non-smooth boundary points.
        collar_width: Default width of the boundary collar.
        boundary_point: ``sigma -> q(sigma)``.
        inward_normal: ``sigma -> nu(sigma)`` (Euclidean unit normal).
        project: ``x -> sigma`` of the closest boundary point.
    """

    kind: DomainKind
    dim: int
    phi: Callable[[Point], Array]
    bounding_box: tuple[tuple[float, float], ...]
    boundary_length: float
    periodic: bool
    boundary_point: Callable[[Array], Point]
    inward_normal: Callable[[Array], Point]
    project: Callable[[Array], float]
    corners: tuple[float, ...] = ()
    collar_width: float = DEFAULT_COLLAR_WIDTH
    name: str = field(default="")

    def contains(self, x: Array, tol: float = 0.0) -> bool:
        """Whether ``x`` lies in the closure of the domain (up to ``tol``)."""
        return bool(self.phi(jnp.asarray(x, dtype=float)) >= -tol)

    def check_contains(self, x: Array, tol: float = 1e-9) -> None:
        """Raise `DomainError` unless ``x`` is in the closure of the domain."""
        if not self.contains(x, tol=tol):
            msg = f"point {np.asarray(x).tolist()} lies outside the {self.kind} domain"
            raise DomainError(msg)

    def wrap(self, sigma: float) -> float:
        """Reduce a boundary parameter to its canonical range."""
        if self.periodic:
            return float(np.mod(sigma, self.boundary_length))
        return float(sigma)

    def near_corner(self, sigma: float, tol: float) -> float | None:
        """Return the corner parameter within ``tol`` of ``sigma``, if any."""
        for corner in self.corners:
            gap = abs(sigma - corner)
            if self.periodic:
                gap = min(gap, self.boundary_length - gap)
            if gap <= tol:
                return corner
        return None

    def boundary_parameters(self, n: int, *, avoid_corners: float = 0.0) -> NDArray:
        """Uniformly spaced boundary parameters.

        Args:
            n: Number of samples (ignored in 1D, where both endpoints are returned).
            avoid_corners: Drop samples closer than this to a corner.

        Returns:
            Array of parameters.
        """
        if self.dim == 1:
            return np.array([0.0, 1.0])
        if self.periodic:
            sigmas = np.arange(n) * (self.boundary_length / n)
        else:
            sigmas = (np.arange(n) + 0.5) * (self.boundary_length / n)
        if avoid_corners > 0:
            keep = [self.near_corner(s, avoid_corners) is None for s in sigmas]
            sigmas = sigmas[np.asarray(keep, dtype=bool)]
        return sigmas

    def interior_grid(self, spacing: float, margin: float = 0.0) -> NDArray:
        """Tensor grid of points of the bounding box with ``phi >= margin``.

        Args:
            spacing: Target grid spacing.
            margin: Minimal level-set value of kept points.

        Returns:
            Array of shape ``(n, dim)``.
        """
        axes = []
        for lo, hi in self.bounding_box:
            n = max(round((hi - lo) / spacing), 1)
            axes.append(lo + (np.arange(n) + 0.5) * (hi - lo) / n)
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.dim)
        values = np.asarray(self.phi(jnp.asarray(mesh)))
        return mesh[values >= margin]


# ------------------------------------------------------------------------------
# Interval
# ------------------------------------------------------------------------------


def create_interval(a: float = 0.0, b: float = 1.0, **kwargs) -> Domain:
    """The interval ``(a, b)``; ``sigma = 0`` is ``a`` and ``sigma = 1`` is ``b``."""
    if not b > a:
        msg = f"empty interval ({a}, {b})"
        raise DomainError(msg)

    def phi(x):
        x = jnp.asarray(x)
        return jnp.minimum(x[..., 0] - a, b - x[..., 0])

    def boundary_point(sigma):
        return jnp.atleast_1d(jnp.where(sigma < 0.5, a, b))

    def inward_normal(sigma):
        return jnp.atleast_1d(jnp.where(sigma < 0.5, 1.0, -1.0))

    def project(x):
        x = float(np.asarray(x).reshape(-1)[0])
        return 0.0 if x - a <= b - x else 1.0

    return Domain(
        kind=DomainKind.INTERVAL,
        dim=1,
        phi=phi,
        bounding_box=((a, b),),
        boundary_length=2.0,
        periodic=False,
        boundary_point=boundary_point,
        inward_normal=inward_normal,
        project=project,
        collar_width=kwargs.get("collar_width", min(DEFAULT_COLLAR_WIDTH, (b - a) / 4)),
        name=f"interval({a},{b})",
    )


# ------------------------------------------------------------------------------
# Rectangle / unit square
# ------------------------------------------------------------------------------


def create_rectangle(
    lo: tuple[float, float] = (0.0, 0.0), hi: tuple[float, float] = (1.0, 1.0), **kwargs
) -> Domain:
    """An axis-aligned rectangle, parameterised counterclockwise from ``lo``."""
    (x0, y0), (x1, y1) = lo, hi
    lx, ly = x1 - x0, y1 - y0
    if lx <= 0 or ly <= 0:
        msg = f"degenerate rectangle {lo} -> {hi}"
        raise DomainError(msg)
    breaks = (0.0, lx, lx + ly, 2 * lx + ly)
    perimeter = 2 * (lx + ly)

    def phi(x):
        x = jnp.asarray(x)
        return jnp.minimum(
            jnp.minimum(x[..., 0] - x0, x1 - x[..., 0]),
            jnp.minimum(x[..., 1] - y0, y1 - x[..., 1]),
        )

    def _edge(s):
        return jnp.sum(s >= jnp.asarray(breaks[1:]))

    def boundary_point(sigma):
        s = jnp.mod(sigma, perimeter)
        edge = _edge(s)
        points = jnp.stack([
            jnp.stack([x0 + s, y0]),
            jnp.stack([x1, y0 + (s - breaks[1])]),
            jnp.stack([x1 - (s - breaks[2]), y1]),
            jnp.stack([x0, y1 - (s - breaks[3])]),
        ])
        return points[edge]

    normals = jnp.array([[0.0, 1.0], [-1.0, 0.0], [0.0, -1.0], [1.0, 0.0]])

    def inward_normal(sigma):
        return normals[_edge(jnp.mod(sigma, perimeter))]

    def project(x):
        px, py = (float(v) for v in np.asarray(x).reshape(-1)[:2])
        gaps = [py - y0, x1 - px, y1 - py, px - x0]
        edge = int(np.argmin(gaps))
        along = [px - x0, py - y0, x1 - px, y1 - py][edge]
        length = [lx, ly, lx, ly][edge]
        return float(np.mod(breaks[edge] + np.clip(along, 0.0, length), perimeter))

    return Domain(
        kind=DomainKind.SQUARE,
        dim=2,
        phi=phi,
        bounding_box=((x0, x1), (y0, y1)),
        boundary_length=perimeter,
        periodic=True,
        boundary_point=boundary_point,
        inward_normal=inward_normal,
        project=project,
        corners=breaks,
        collar_width=kwargs.get("collar_width", min(DEFAULT_COLLAR_WIDTH, lx / 4, ly / 4)),
        name=f"rectangle({lo},{hi})",
    )


def create_unit_square(**kwargs) -> Domain:
    """The unit square ``(0, 1)^2``."""
    return create_rectangle((0.0, 0.0), (1.0, 1.0), **kwargs)


# ------------------------------------------------------------------------------
# Disc
# ------------------------------------------------------------------------------


def create_disc(
    center: tuple[float, float] = (0.0, 0.0), radius: float = 1.0, **kwargs
) -> Domain:
    """The disc ``|x - center| < radius`` with arc-length boundary parameter."""
    c = jnp.asarray(center, dtype=float)
    if radius <= 0:
        msg = f"non-positive radius {radius}"
        raise DomainError(msg)

    def phi(x):
        return radius - jnp.linalg.norm(jnp.asarray(x) - c, axis=-1)

    def boundary_point(sigma):
        angle = sigma / radius
        return c + radius * jnp.stack([jnp.cos(angle), jnp.sin(angle)])

    def inward_normal(sigma):
        angle = sigma / radius
        return -jnp.stack([jnp.cos(angle), jnp.sin(angle)])

    def project(x):
        dx = np.asarray(x, dtype=float).reshape(-1)[:2] - np.asarray(center)
        return float(np.mod(math.atan2(dx[1], dx[0]), 2 * np.pi) * radius)

    return Domain(
        kind=DomainKind.DISC,
        dim=2,
        phi=phi,
        bounding_box=(
            (center[0] - radius, center[0] + radius),
            (center[1] - radius, center[1] + radius),
        ),
        boundary_length=2 * np.pi * radius,
        periodic=True,
        boundary_point=boundary_point,
        inward_normal=inward_normal,
        project=project,
        collar_width=kwargs.get("collar_width", min(DEFAULT_COLLAR_WIDTH, radius / 4)),
        name=f"disc({center},{radius})",
    )


# ------------------------------------------------------------------------------
# Half-plane
# ------------------------------------------------------------------------------


def create_half_plane(extent: float = DEFAULT_HALF_PLANE_EXTENT, **kwargs) -> Domain:
    """The half-plane ``x2 > 0``, boxed to ``[-extent, extent] x [0, extent]``.

    The box only bounds sampling and plotting; rays are not stopped by it.
    """

    def phi(x):
        return jnp.asarray(x)[..., 1]

    def boundary_point(sigma):
        return jnp.stack([sigma, jnp.zeros_like(sigma)])

    def inward_normal(sigma):
        return jnp.stack([jnp.zeros_like(sigma), jnp.ones_like(sigma)])

    def project(x):
        return float(np.asarray(x).reshape(-1)[0])

    return Domain(
        kind=DomainKind.HALF_PLANE,
        dim=2,
        phi=phi,
        bounding_box=((-extent, extent), (0.0, extent)),
        boundary_length=2 * extent,
        periodic=False,
        boundary_point=boundary_point,
        inward_normal=inward_normal,
        project=project,
        collar_width=kwargs.get("collar_width", DEFAULT_COLLAR_WIDTH),
        name=f"half_plane({extent})",
    )


# ------------------------------------------------------------------------------
# User level sets
# ------------------------------------------------------------------------------


def _radial_root(phi: Callable, center: NDArray, direction: NDArray, r_max: float) -> float:
    lo, hi = 0.0, r_max
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if float(phi(jnp.asarray(center + mid * direction))) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _trigonometric_series(values: NDArray) -> tuple[Array, Array]:
    """Coefficients of the real trigonometric interpolant of periodic samples."""
    n = values.shape[0]
    coeffs = np.fft.rfft(values) / n
    modes = np.arange(coeffs.shape[0])
    weights = np.full(coeffs.shape[0], 2.0)
    weights[0] = 1.0
    if n % 2 == 0:
        weights[-1] = 0.0  # Nyquist term dropped to keep the interpolant real
    return jnp.asarray(coeffs * weights), jnp.asarray(modes, dtype=float)


def create_level_set(
    phi: Callable[[Point], Array],
    box: tuple[tuple[float, float], tuple[float, float]],
    n_boundary: int = DEFAULT_LEVEL_SET_SAMPLES,
    **kwargs,
) -> Domain:
    """A star-shaped level-set domain ``{phi > 0}`` inside ``box``.

    The boundary radius ``r(theta)`` seen from the box centre is traced by
    bisection at ``n_boundary`` angles and replaced by its trigonometric
    interpolant, so the traced curve is smooth. The arc length of that curve is
    integrated spectrally and inverted by Newton iterations to obtain the
    unit-speed parameterisation; the inward normal is the rotated unit tangent.

    Args:
        phi: Level-set function on points of shape ``(..., 2)``.
        box: Bounding box ``((x_lo, x_hi), (y_lo, y_hi))``.
        n_boundary: Number of traced angles.
        **kwargs: ``collar_width`` override.

    Returns:
        The domain.

    Raises:
        DomainError: If the box centre is not inside the level set, or the
            boundary touches the box.
    """
    center = np.array([0.5 * (box[0][0] + box[0][1]), 0.5 * (box[1][0] + box[1][1])])
    if float(phi(jnp.asarray(center))) <= 0:
        msg = "level-set domains must contain the centre of their bounding box"
        raise DomainError(msg)
    r_max = float(np.hypot(box[0][1] - box[0][0], box[1][1] - box[1][0]))

    angles = np.arange(n_boundary) * (2 * np.pi / n_boundary)
    directions = np.stack([np.cos(angles), np.sin(angles)], axis=-1)
    radii = np.array([_radial_root(phi, center, d, r_max) for d in directions])
    if np.any(radii > 0.999 * r_max):
        msg = "level set is not closed inside its bounding box"
        raise DomainError(msg)

    r_coeffs, modes = _trigonometric_series(radii)
    c = jnp.asarray(center)

    def radius(theta):
        return jnp.real(jnp.sum(r_coeffs * jnp.exp(1j * modes * theta)))

    def d_radius(theta):
        return jnp.real(jnp.sum(1j * modes * r_coeffs * jnp.exp(1j * modes * theta)))

    def curve(theta):
        return c + radius(theta) * jnp.stack([jnp.cos(theta), jnp.sin(theta)])

    def d_curve(theta):
        e_r = jnp.stack([jnp.cos(theta), jnp.sin(theta)])
        e_t = jnp.stack([-jnp.sin(theta), jnp.cos(theta)])
        return d_radius(theta) * e_r + radius(theta) * e_t

    fine = 4 * n_boundary
    thetas = np.arange(fine) * (2 * np.pi / fine)
    speeds = np.asarray(jax.vmap(lambda th: jnp.linalg.norm(d_curve(th)))(jnp.asarray(thetas)))
    s_coeffs = np.fft.rfft(speeds) / fine
    total = float(2 * np.pi * s_coeffs[0].real)
    k = np.arange(1, s_coeffs.shape[0] - 1)
    s_series = jnp.asarray(2 * s_coeffs[1:-1] / (1j * k))
    s_modes = jnp.asarray(k, dtype=float)
    s_offset = float(np.sum(np.real(np.asarray(s_series))))
    logger.debug(f"Traced level set with {n_boundary} angles, length {total:.8f}")

    def arclength(theta):
        periodic = jnp.real(jnp.sum(s_series * jnp.exp(1j * s_modes * theta)))
        return s_coeffs[0].real * theta + periodic - s_offset

    def angle(sigma):
        s = jnp.mod(sigma, total)
        theta = 2 * jnp.pi * s / total
        for _ in range(12):
            theta = theta - (arclength(theta) - s) / jnp.linalg.norm(d_curve(theta))
        return theta

    def boundary_point(sigma):
        return curve(angle(sigma))

    def inward_normal(sigma):
        tangent = d_curve(angle(sigma))
        tangent = tangent / jnp.linalg.norm(tangent)
        return jnp.stack([-tangent[1], tangent[0]])

    samples = np.asarray(jax.vmap(curve)(jnp.asarray(thetas)))
    sample_sigma = np.asarray(jax.vmap(arclength)(jnp.asarray(thetas)))

    def project(x):
        x = np.asarray(x, dtype=float).reshape(-1)[:2]
        i = int(np.argmin(np.linalg.norm(samples - x, axis=1)))
        return float(np.mod(sample_sigma[i], total))

    return Domain(
        kind=DomainKind.LEVEL_SET,
        dim=2,
        phi=phi,
        bounding_box=(tuple(box[0]), tuple(box[1])),
        boundary_length=total,
        periodic=True,
        boundary_point=boundary_point,
        inward_normal=inward_normal,
        project=project,
        collar_width=kwargs.get("collar_width", DEFAULT_COLLAR_WIDTH),
        name="level_set",
    )


# ------------------------------------------------------------------------------
# General api
# ------------------------------------------------------------------------------

DOMAIN_FACTORIES: dict[DomainKind | str, Callable[..., Domain]] = {
    DomainKind.INTERVAL: create_interval,
    DomainKind.SQUARE: create_rectangle,
    DomainKind.DISC: create_disc,
    DomainKind.HALF_PLANE: create_half_plane,
    DomainKind.LEVEL_SET: create_level_set,
}


def create_domain(kind: DomainKind | str, **kwargs) -> Domain:
    """Create a domain from its kind and factory keyword arguments.

    Raises:
        DomainError: If the kind is unknown.
    """
    try:
        factory = DOMAIN_FACTORIES[DomainKind(kind)]
    except (KeyError, ValueError) as error:
        msg = f"unknown domain kind {kind!r}; choose from {[str(k) for k in DomainKind]}"
        raise DomainError(msg) from error
    return factory(**kwargs)


def signed_level(domain: Domain, points: Float[Array, "n d"]) -> NDArray:
    """Evaluate the level-set function on a batch of points (numpy output)."""
    return np.asarray(domain.phi(jnp.asarray(points, dtype=float)))
