"""Boundary collar charts in quasi-normal coordinates.

The chart is ``(sigma, z) -> x = q(sigma) + z * n_g(sigma)``, where ``q`` is the
arc-length boundary parameterisation and ``n_g = G nu / sqrt(nu^T G nu)`` is the
g-unit, g-orthogonal inward normal (``G = g^{-1}``, ``nu`` the Euclidean inward
normal). At ``z = 0`` the pulled-back metric is block diagonal with
``g_zz = 1``. Covector components in the chart are ``(xi', zeta) = J^T xi``.
"""

import warnings
from dataclasses import dataclass

import jax
import jax.numpy as jnp
import numpy as np
from loguru import logger

from gcckit.errors import CollarTooWideError, DomainError
from gcckit.geometry.domain import Domain
from gcckit.geometry.hamiltonian import PhasePoint
from gcckit.geometry.metric import DEFAULT_TOLERANCES, MetricField, Tolerances
from gcckit.types import Array, Callable, Covector, NDArray, Point

DEFAULT_MIN_JACOBIAN_RATIO = 0.1
DEFAULT_CHART_SAMPLES = 64
DEFAULT_DEPTH_SAMPLES = 9
NEWTON_ITERATIONS = 30


@dataclass(frozen=True)
class BoundaryFrame:
    """Normal data at one boundary point.

    Attributes:
        sigma: Boundary parameter.
        point: ``q(sigma)``.
        nu: Euclidean inward unit normal.
        n_g: g-unit inward normal vector.
        dz: Differential of the chart coordinate ``z`` at the boundary (a covector).
        normal_norm: ``sqrt(nu^T G nu)``.
    """

    sigma: float
    point: NDArray
    nu: NDArray
    n_g: NDArray
    dz: NDArray
    normal_norm: float

    def zeta(self, xi: Covector) -> float:
        """Normal covector component ``zeta = n_g . xi``."""
        return float(np.dot(self.n_g, xi))


@dataclass(frozen=True)
class ChartPoint:
    """A phase point in collar coordinates ``(t, sigma, z; tau, xi', zeta)``.

    In 1D ``xi_tan`` is empty and ``sigma`` selects the endpoint.
    """

    t: float
    sigma: float
    z: float
    tau: float
    xi_tan: NDArray
    zeta: float


@dataclass(frozen=True, eq=False)
class CollarChart:
    """Quasi-normal collar chart of width ``width`` around the boundary.

    Attributes:
        domain: The domain.
        metric: The metric field.
        width: Collar width ``delta_0``.
        tol_chart: Tolerance for the block structure at ``z = 0``.
        block_defect: Measured ``max |g_{jd}|, |g_dd - 1|`` over boundary samples.
        min_jacobian_ratio: Smallest sampled ``det J(sigma, z) / det J(sigma, 0)``.
        tolerances: Shared numerical tolerances.
        map_fn: Jitted ``(sigma, z) -> x``.
        jacobian_fn: Jitted ``(sigma, z) -> J`` with columns ``d/dsigma, d/dz``
            (only ``d/dz`` in 1D).
    """

    domain: Domain
    metric: MetricField
    width: float
    tol_chart: float
    block_defect: float
    min_jacobian_ratio: float
    tolerances: Tolerances
    map_fn: Callable
    jacobian_fn: Callable

    @property
    def dim(self) -> int:
        return self.domain.dim

    def normal_g(self, sigma: float) -> NDArray:
        """g-unit inward normal at ``q(sigma)``."""
        return self.frame(sigma).n_g

    def map(self, sigma: float, z: float) -> NDArray:
        return np.asarray(self.map_fn(float(sigma), float(z)))

    def jacobian(self, sigma: float, z: float) -> NDArray:
        return np.asarray(self.jacobian_fn(float(sigma), float(z)))

    def metric_in_chart(self, sigma: float, z: float) -> NDArray:
        """Pulled-back covariant metric ``J^T g(x) J`` at ``(sigma, z)``."""
        jac = self.jacobian(sigma, z)
        g = np.asarray(self.metric.g(jnp.asarray(self.map(sigma, z))))
        return jac.T @ g @ jac

    def frame(self, sigma: float) -> BoundaryFrame:
        """Normal data at ``q(sigma)``."""
        point = np.asarray(self.domain.boundary_point(jnp.asarray(float(sigma))))
        nu = np.asarray(self.domain.inward_normal(jnp.asarray(float(sigma))))
        g_inv = np.asarray(self.metric.g_inv(jnp.asarray(point)))
        norm = float(np.sqrt(nu @ g_inv @ nu))
        return BoundaryFrame(
            sigma=float(sigma),
            point=point,
            nu=nu,
            n_g=g_inv @ nu / norm,
            dz=nu / norm,
            normal_norm=norm,
        )

    def inverse(self, x: Point) -> tuple[float, float]:
        """``x -> (sigma, z)`` inside the collar.

        Raises:
            DomainError: If Newton's method does not converge (``x`` far outside
                the collar).
        """
        x = np.asarray(x, dtype=float).reshape(-1)
        sigma = self.domain.project(x)
        frame = self.frame(sigma)
        z = float(np.dot(x - frame.point, frame.nu)) / frame.normal_norm
        if self.dim == 1:
            return sigma, float((x - frame.point)[0] / frame.n_g[0])

        for _ in range(NEWTON_ITERATIONS):
            residual = self.map(sigma, z) - x
            if np.linalg.norm(residual) <= 1e-14 * (1.0 + np.linalg.norm(x)):
                break
            step = np.linalg.solve(self.jacobian(sigma, z), residual)
            sigma, z = self.domain.wrap(sigma - step[0]), z - step[1]
        else:
            if np.linalg.norm(self.map(sigma, z) - x) > 1e-10:
                msg = f"collar inverse did not converge at x={x.tolist()}"
                raise DomainError(msg)
        return sigma, z

    # --------------------------------------------------------------------------
    # Phase-space coordinates
    # --------------------------------------------------------------------------

    def to_chart(self, rho: PhasePoint) -> ChartPoint:
        """Express a Cartesian phase point in collar coordinates."""
        sigma, z = self.inverse(rho.x)
        components = self.jacobian(sigma, z).T @ np.asarray(rho.xi, dtype=float)
        return ChartPoint(
            t=rho.t,
            sigma=sigma,
            z=z,
            tau=rho.tau,
            xi_tan=components[:-1],
            zeta=float(components[-1]),
        )

    def from_chart(self, point: ChartPoint) -> PhasePoint:
        """Inverse of `to_chart`."""
        jac = self.jacobian(point.sigma, point.z)
        components = np.concatenate([np.asarray(point.xi_tan, dtype=float), [point.zeta]])
        return PhasePoint(
            t=point.t,
            x=self.map(point.sigma, point.z),
            tau=point.tau,
            xi=np.linalg.solve(jac.T, components),
        )


# ------------------------------------------------------------------------------
# Construction
# ------------------------------------------------------------------------------


def _chart_functions(domain: Domain, metric: MetricField) -> tuple[Callable, Callable]:
    def normal_g(sigma):
        nu = domain.inward_normal(sigma)
        g_inv = metric.g_inv(domain.boundary_point(sigma))
        return g_inv @ nu / jnp.sqrt(nu @ g_inv @ nu)

    def chart_map(sigma, z):
        return domain.boundary_point(sigma) + z * normal_g(sigma)

    if domain.dim == 1:

        def jacobian(sigma, z):
            return jax.jacfwd(chart_map, argnums=1)(sigma, z)[:, None]

    else:

        def jacobian(sigma, z):
            d_sigma, d_z = jax.jacfwd(chart_map, argnums=(0, 1))(sigma, z)
            return jnp.stack([d_sigma, d_z], axis=-1)

    return jax.jit(chart_map), jax.jit(jacobian)


def _sample_parameters(domain: Domain, n: int) -> NDArray:
    if domain.dim == 1:
        return np.array([0.0, 1.0])
    spacing = domain.boundary_length / n
    return domain.boundary_parameters(n, avoid_corners=0.25 * spacing)


def build_collar_chart(
    domain: Domain,
    metric: MetricField,
    width: float | None = None,
    *,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
    n_samples: int = DEFAULT_CHART_SAMPLES,
    min_jacobian_ratio: float = DEFAULT_MIN_JACOBIAN_RATIO,
) -> CollarChart:
    """Build the quasi-normal collar chart of a domain.

    Args:
        domain: The domain.
        metric: The metric field.
        width: Collar width; defaults to the domain's declared width.
        tolerances: Numerical tolerances.
        n_samples: Boundary samples for the Jacobian and block-structure checks.
        min_jacobian_ratio: Smallest admissible ``det J(sigma, z) / det J(sigma, 0)``
            over the collar (the normal map is treated as degenerate below it).

    Returns:
        The chart.

    Raises:
        CollarTooWideError: If the Jacobian of the normal map degenerates
            inside the requested width.
    """
    width = domain.collar_width if width is None else float(width)
    chart_map, jacobian = _chart_functions(domain, metric)

    sigmas = _sample_parameters(domain, n_samples)
    depths = np.linspace(0.0, width, DEFAULT_DEPTH_SAMPLES)
    worst_ratio, worst_at = np.inf, None
    for sigma in sigmas:
        dets = [float(np.linalg.det(np.asarray(jacobian(sigma, z)))) for z in depths]
        ratios = np.asarray(dets) / dets[0]
        i = int(np.argmin(ratios))
        if ratios[i] < worst_ratio:
            worst_ratio, worst_at = float(ratios[i]), (float(sigma), float(depths[i]))
    if worst_ratio <= min_jacobian_ratio:
        msg = (
            f"collar of width {width} is too wide: normal map Jacobian ratio "
            f"{worst_ratio:.3e} at (sigma, z) = {worst_at}"
        )
        raise CollarTooWideError(msg)

    tol_chart = metric.tol_chart(tolerances)
    defect = 0.0
    for sigma in sigmas:
        jac = np.asarray(jacobian(sigma, 0.0))
        g = np.asarray(metric.g(chart_map(sigma, 0.0)))
        pulled = jac.T @ g @ jac
        defect = max(
            defect,
            float(np.max(np.abs(pulled[:-1, -1]), initial=0.0)),
            abs(float(pulled[-1, -1]) - 1.0),
        )
    if defect > tol_chart:
        msg = f"collar chart block structure defect {defect:.3e} exceeds {tol_chart:.1e}"
        logger.warning(msg)
        warnings.warn(msg, stacklevel=2)

    logger.debug(
        f"Collar chart on {domain.name}: width {width}, Jacobian ratio >= "
        f"{worst_ratio:.3f}, block defect {defect:.2e}"
    )
    return CollarChart(
        domain=domain,
        metric=metric,
        width=width,
        tol_chart=tol_chart,
        block_defect=defect,
        min_jacobian_ratio=worst_ratio,
        tolerances=tolerances,
        map_fn=chart_map,
        jacobian_fn=jacobian,
    )


def chart_covector(chart: CollarChart, sigma: float, xi_tan: Array, zeta: float) -> NDArray:
    """Cartesian covector with chart components ``(xi', zeta)`` at ``q(sigma)``."""
    return chart.from_chart(
        ChartPoint(t=0.0, sigma=sigma, z=0.0, tau=0.0, xi_tan=np.asarray(xi_tan), zeta=zeta)
    ).xi
