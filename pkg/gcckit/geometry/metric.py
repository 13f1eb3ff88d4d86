"""Rough metric fields (kappa, g) with derivative oracles.

A `MetricField` stores the covariant metric ``g_ij``, its inverse ``g^ij``, the
derivative oracle ``dg[k, i, j] = d_k g^ij`` and the density ``kappa``. The
derivative oracle is either analytic (forward-mode autodiff of ``g^ij``) or a
centred finite difference with step ``h_fd``; Lipschitz fields always use the
latter.
"""

import dataclasses
from dataclasses import dataclass

import jax
import jax.numpy as jnp
import numpy as np
from loguru import logger

from gcckit.enums import Regularity
from gcckit.errors import ConfigurationError, DomainError
from gcckit.types import (
    Array,
    Callable,
    DerivativeField,
    GradientField,
    MatrixField,
    NDArray,
    Point,
    ScalarField,
)

# ---------------------------------------------------------------------------
# Tolerances
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances shared by geometry, boundary laws and ray tracing.

    Attributes:
        h_fd: Step of centred finite differences for ``d g^ij``.
        tol_chart_analytic: Chart block-structure tolerance, analytic metrics.
        tol_chart_fd: Chart block-structure tolerance, finite-differenced metrics.
        eps_cls_rel: Relative glancing band on ``p`` of the tangential projection.
        eps_d: Absolute band on ``H_p^2 z`` separating diffractive/gliding/order 3.
        hp2z_step: Finite-difference step for ``H_p^2 z``.
        tol_p: Relative tolerance on the energy shell.
        tol_event: Boundary event location tolerance on ``z``.
    """

    h_fd: float = 1e-5
    tol_chart_analytic: float = 1e-8
    tol_chart_fd: float = 1e-4
    eps_cls_rel: float = 1e-6
    eps_d: float = 1e-6
    hp2z_step: float = 1e-5
    tol_p: float = 1e-8
    tol_event: float = 1e-10


DEFAULT_TOLERANCES = Tolerances()

DEFAULT_BOUND_SAMPLES = 41

# ---------------------------------------------------------------------------
# Metric field
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MetricField:
    """The pair (kappa, g) with derivative oracles.

    Instances hash by identity, which lets jitted kernels be cached per metric.

    Attributes:
        dim: Spatial dimension.
        g: ``x -> g_ij(x)``.
        g_inv: ``x -> g^ij(x)``.
        dg: ``x -> d_k g^ij(x)`` with shape ``(k, i, j)``, or None when unavailable.
        kappa: ``x -> kappa(x) > 0``.
        dkappa: ``x -> grad kappa(x)``, or None.
        regularity: C1 or Lipschitz.
        analytic: Whether ``dg`` is exact (autodiff) rather than finite differences.
        eig_bounds: Sampled ``(lambda_min, lambda_max)`` of ``g``, once certified.
        kappa_bounds: Sampled ``(kappa_min, kappa_max)``, once certified.
        lip_modulus: Sampled bound on the W^{1,inf} norm of ``g^ij``.
        perturbation_distance: Measured W^{1,inf} distance to the unperturbed
            metric, for fields produced by `lipschitz_perturb`.
        name: Human-readable description.
    """

    dim: int
    g: MatrixField
    g_inv: MatrixField
    dg: DerivativeField | None
    kappa: ScalarField
    dkappa: GradientField | None = None
    regularity: Regularity = Regularity.C1
    analytic: bool = True
    eig_bounds: tuple[float, float] | None = None
    kappa_bounds: tuple[float, float] | None = None
    lip_modulus: float | None = None
    perturbation_distance: float | None = None
    name: str = ""

    def require_dg(self) -> DerivativeField:
        """Return the derivative oracle or raise `ConfigurationError`."""
        if self.dg is None:
            msg = f"metric {self.name or '<anonymous>'} has no derivative oracle for g^ij"
            raise ConfigurationError(msg)
        return self.dg

    def tol_chart(self, tolerances: Tolerances = DEFAULT_TOLERANCES) -> float:
        """Chart tolerance appropriate for the derivative oracle of this metric."""
        if self.analytic:
            return tolerances.tol_chart_analytic
        return tolerances.tol_chart_fd

    def norm_sq(self, x: Point, xi: Array) -> Array:
        """``g^ij(x) xi_i xi_j``."""
        return xi @ self.g_inv(x) @ xi


# ---------------------------------------------------------------------------
# Derivative oracles
# ---------------------------------------------------------------------------


def autodiff_derivative(g_inv: MatrixField) -> DerivativeField:
    """Exact ``d_k g^ij`` by forward-mode differentiation of ``g^ij``."""
    jac = jax.jacfwd(g_inv)

    def dg(x: Point) -> Array:
        return jnp.moveaxis(jac(jnp.asarray(x, dtype=float)), -1, 0)

    return dg


def finite_difference_derivative(
    g_inv: MatrixField, dim: int, h_fd: float = DEFAULT_TOLERANCES.h_fd
) -> DerivativeField:
    """Centred finite-difference ``d_k g^ij`` with step ``h_fd``."""
    eye = jnp.eye(dim)

    def dg(x: Point) -> Array:
        x = jnp.asarray(x, dtype=float)
        return jnp.stack([
            (g_inv(x + h_fd * eye[k]) - g_inv(x - h_fd * eye[k])) / (2 * h_fd)
            for k in range(dim)
        ])

    return dg


def _unit_kappa(x: Point) -> Array:
    return jnp.ones(jnp.shape(x)[:-1])


def _zero_gradient(x: Point) -> Array:
    return jnp.zeros_like(jnp.asarray(x, dtype=float))


def _kappa_oracles(
    kappa: ScalarField | None, *, analytic: bool, dim: int, h_fd: float
) -> tuple[ScalarField, GradientField]:
    if kappa is None:
        return _unit_kappa, _zero_gradient
    if analytic:
        return kappa, jax.grad(lambda x: jnp.sum(kappa(x)))
    eye = jnp.eye(dim)

    def dkappa(x: Point) -> Array:
        return jnp.stack([
            (kappa(x + h_fd * eye[k]) - kappa(x - h_fd * eye[k])) / (2 * h_fd)
            for k in range(dim)
        ])

    return kappa, dkappa


# ---------------------------------------------------------------------------
# Factories
# ---------------------------------------------------------------------------


def create_metric(
    g: MatrixField,
    dim: int,
    kappa: ScalarField | None = None,
    *,
    g_inv: MatrixField | None = None,
    derivative: str | None = "autodiff",
    regularity: Regularity = Regularity.C1,
    h_fd: float = DEFAULT_TOLERANCES.h_fd,
    name: str = "",
) -> MetricField:
    """Create a metric field from ``g_ij`` (and optionally its inverse).

    Args:
        g: Covariant metric ``x -> g_ij(x)``.
        dim: Spatial dimension.
        kappa: Density ``x -> kappa(x)``; defaults to 1.
        g_inv: Inverse metric; computed with ``jnp.linalg.inv`` when omitted.
        derivative: ``"autodiff"``, ``"fd"`` or None (no oracle).
        regularity: Declared regularity.
        h_fd: Finite-difference step.
        name: Description.

    Returns:
        The metric field.

    Raises:
        ConfigurationError: If ``derivative`` is not recognised, or an analytic
            oracle is requested for a Lipschitz field.
    """
    if g_inv is None:

        def g_inv(x):
            return jnp.linalg.inv(g(x))

    if derivative == "autodiff" and regularity == Regularity.LIPSCHITZ:
        msg = "Lipschitz metrics use finite-difference derivatives (derivative='fd')"
        raise ConfigurationError(msg)

    if derivative == "autodiff":
        dg, analytic = autodiff_derivative(g_inv), True
    elif derivative == "fd":
        dg, analytic = finite_difference_derivative(g_inv, dim, h_fd), False
    elif derivative is None:
        dg, analytic = None, False
    else:
        msg = f"unknown derivative oracle {derivative!r}"
        raise ConfigurationError(msg)

    kappa_fn, dkappa = _kappa_oracles(kappa, analytic=analytic, dim=dim, h_fd=h_fd)
    return MetricField(
        dim=dim,
        g=g,
        g_inv=g_inv,
        dg=dg,
        kappa=kappa_fn,
        dkappa=dkappa,
        regularity=regularity,
        analytic=analytic,
        name=name,
    )


def flat_metric(dim: int, kappa: ScalarField | None = None) -> MetricField:
    """The Euclidean metric with exact (zero) derivatives."""
    eye = jnp.eye(dim)

    def g(x):
        del x
        return eye

    def dg(x):
        del x
        return jnp.zeros((dim, dim, dim))

    kappa_fn, dkappa = _kappa_oracles(kappa, analytic=True, dim=dim, h_fd=0.0)
    return MetricField(
        dim=dim,
        g=g,
        g_inv=g,
        dg=dg,
        kappa=kappa_fn,
        dkappa=dkappa,
        regularity=Regularity.C1,
        analytic=True,
        name="flat",
    )


def conformal_metric(
    speed: ScalarField,
    dim: int,
    kappa: ScalarField | None = None,
    *,
    derivative: str = "autodiff",
    regularity: Regularity = Regularity.C1,
) -> MetricField:
    """Metric with ``g^ij = c(x)^2 delta^ij``, i.e. wave speed ``c``."""
    eye = jnp.eye(dim)

    def g(x):
        return eye / speed(x) ** 2

    def g_inv(x):
        return eye * speed(x) ** 2

    return create_metric(
        g,
        dim,
        kappa,
        g_inv=g_inv,
        derivative=derivative,
        regularity=regularity,
        name="conformal",
    )


def scaled_metric(metric: MetricField, factor: float) -> MetricField:
    """Rescale ``g`` by a constant: ``g -> factor * g`` (speed ``/ sqrt(factor)``).

    Raises:
        ConfigurationError: If ``factor`` is not positive.
    """
    if factor <= 0:
        msg = f"metric scale factor must be positive, got {factor}"
        raise ConfigurationError(msg)
    dg = metric.dg

    def g(x):
        return factor * metric.g(x)

    def g_inv(x):
        return metric.g_inv(x) / factor

    return dataclasses.replace(
        metric,
        g=g,
        g_inv=g_inv,
        dg=None if dg is None else (lambda x: dg(x) / factor),
        eig_bounds=None
        if metric.eig_bounds is None
        else tuple(factor * b for b in metric.eig_bounds),
        lip_modulus=None,
        name=f"{factor:g}*{metric.name}",
    )


# ---------------------------------------------------------------------------
# Sampling certificates
# ---------------------------------------------------------------------------


def bound_samples(
    box: tuple[tuple[float, float], ...], n: int = DEFAULT_BOUND_SAMPLES
) -> NDArray:
    """Tensor grid of ``n`` points per axis over a box (boundary included)."""
    axes = [np.linspace(lo, hi, n) for lo, hi in box]
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(box))


def sample_metric(metric: MetricField, points: NDArray) -> dict[str, NDArray]:
    """Evaluate eigenvalues of ``g``, ``kappa`` and ``|d g^ij|`` on sample points.

    Returns:
        A dictionary with ``eig`` (n, d), ``kappa`` (n,), ``asym`` (n,),
        ``g_inv_norm`` (n,) and, when a derivative oracle exists, ``dg_norm`` (n,).
    """
    pts = jnp.asarray(points, dtype=float)
    g = jax.vmap(metric.g)(pts)
    g_inv = jax.vmap(metric.g_inv)(pts)
    out = {
        "eig": np.asarray(jnp.linalg.eigvalsh(0.5 * (g + jnp.swapaxes(g, -1, -2)))),
        "asym": np.asarray(jnp.max(jnp.abs(g - jnp.swapaxes(g, -1, -2)), axis=(-2, -1))),
        "kappa": np.asarray(jax.vmap(metric.kappa)(pts)),
        "g_inv_norm": np.asarray(jnp.linalg.norm(g_inv, ord=2, axis=(-2, -1))),
    }
    if metric.dg is not None:
        dg = jax.vmap(metric.dg)(pts)
        out["dg_norm"] = np.asarray(
            jnp.max(jnp.linalg.norm(dg, ord=2, axis=(-2, -1)), axis=-1)
        )
    return out


def certify_metric(
    metric: MetricField,
    box: tuple[tuple[float, float], ...],
    n: int = DEFAULT_BOUND_SAMPLES,
    *,
    continuity_ratio: float = 50.0,
) -> MetricField:
    """Sample the metric over a box and record its bounds.

    Checks symmetry, positive definiteness and positivity of kappa. For C1 fields
    the derivative oracle is additionally probed for jumps between neighbouring
    samples.

    Args:
        metric: The metric to certify.
        box: Sampling box (usually the domain bounding box).
        n: Samples per axis.
        continuity_ratio: Largest tolerated ratio between neighbouring-sample
            jumps of ``dg`` and its typical variation before a C1 warning.

    Returns:
        A copy of the metric with ``eig_bounds``, ``kappa_bounds`` and
        ``lip_modulus`` filled in.

    Raises:
        DomainError: If ``g`` is not symmetric positive definite or ``kappa`` is
            not positive on the samples.
    """
    points = bound_samples(box, n)
    stats = sample_metric(metric, points)
    if float(np.max(stats["asym"])) > 1e-10:
        msg = f"metric {metric.name} is not symmetric on its sampling box"
        raise DomainError(msg)
    lam_min, lam_max = float(np.min(stats["eig"])), float(np.max(stats["eig"]))
    if lam_min <= 0:
        msg = f"metric {metric.name} is not positive definite (lambda_min={lam_min:.3e})"
        raise DomainError(msg)
    k_min, k_max = float(np.min(stats["kappa"])), float(np.max(stats["kappa"]))
    if k_min <= 0:
        msg = f"kappa is not positive (kappa_min={k_min:.3e})"
        raise DomainError(msg)

    lip = float(np.max(stats["g_inv_norm"]))
    if "dg_norm" in stats:
        lip += float(np.max(stats["dg_norm"]))
        if metric.regularity == Regularity.C1:
            grid = stats["dg_norm"].reshape((n,) * metric.dim)
            jumps = np.max(np.abs(np.diff(grid, axis=0)))
            typical = np.max(np.abs(grid)) / n + 1e-12
            if jumps > continuity_ratio * typical:
                logger.warning(
                    f"metric {metric.name} is tagged C1 but d g^ij jumps by "
                    f"{jumps:.3e} between samples"
                )

    logger.debug(
        f"Certified metric {metric.name}: eig in [{lam_min:.4g}, {lam_max:.4g}], "
        f"kappa in [{k_min:.4g}, {k_max:.4g}], W1inf <= {lip:.4g}"
    )
    return dataclasses.replace(
        metric,
        eig_bounds=(lam_min, lam_max),
        kappa_bounds=(k_min, k_max),
        lip_modulus=lip,
    )
