"""Random Lipschitz perturbations of metrics.

A perturbation is ``g~ = g + eps * B(x)`` where ``B`` is a combination of
piecewise-linear tensor hats ``prod_i max(0, 1 - |x_i - a_i| / r)``. The hat
coefficients are normalised by an a-priori bound on ``sup |B| + sup |grad B|``,
so ``||g~ - g||_{W^{1,inf}} <= eps`` holds everywhere, not only on samples.
"""

import dataclasses

import jax
import jax.numpy as jnp
import numpy as np
from loguru import logger

from gcckit.enums import PerturbationMode, Regularity
from gcckit.errors import PerturbationError, PreconditionError
from gcckit.geometry.metric import (
    DEFAULT_BOUND_SAMPLES,
    DEFAULT_TOLERANCES,
    MetricField,
    bound_samples,
    finite_difference_derivative,
)
from gcckit.types import Array, KeyType, NDArray, Point

DEFAULT_BUMPS = 8
DEFAULT_MAX_RETRIES = 10
RADIUS_RANGE = (0.1, 0.4)


def _hats(x: Point, centers: Array, radii: Array) -> Array:
    """Values of all hats at a single point, shape ``(n_bumps,)``."""
    y = jnp.abs(x[None, :] - centers) / radii[:, None]
    return jnp.prod(jnp.maximum(0.0, 1.0 - y), axis=-1)


def _draw_bumps(
    key: KeyType,
    box: tuple[tuple[float, float], ...],
    n_bumps: int,
    mode: PerturbationMode,
) -> tuple[Array, Array, Array, float]:
    """Random hat centres, radii and coefficients, with the W^{1,inf} bound."""
    dim = len(box)
    lo = jnp.asarray([b[0] for b in box])
    hi = jnp.asarray([b[1] for b in box])
    extent = float(jnp.min(hi - lo))
    k_center, k_radius, k_coeff = jax.random.split(key, 3)

    centers = lo + (hi - lo) * jax.random.uniform(k_center, (n_bumps, dim))
    radii = extent * jax.random.uniform(
        k_radius, (n_bumps,), minval=RADIUS_RANGE[0], maxval=RADIUS_RANGE[1]
    )
    if mode == PerturbationMode.CONFORMAL:
        coeffs = jax.random.uniform(k_coeff, (n_bumps,), minval=-1.0, maxval=1.0)
        sizes = jnp.abs(coeffs)
    else:
        raw = jax.random.normal(k_coeff, (n_bumps, dim, dim))
        sym = 0.5 * (raw + jnp.swapaxes(raw, -1, -2))
        sizes = jnp.linalg.norm(sym, ord=2, axis=(-2, -1))
        coeffs = sym / jnp.max(sizes)
        sizes = sizes / jnp.max(sizes)

    bound = float(jnp.sum(sizes * (1.0 + jnp.sqrt(dim) / radii)))
    return centers, radii, coeffs, bound


def _bump_field(
    centers: Array, radii: Array, coeffs: Array, scale: float, mode: PerturbationMode, dim: int
):
    eye = jnp.eye(dim)

    def field(x):
        weights = _hats(jnp.asarray(x, dtype=float), centers, radii)
        if mode == PerturbationMode.CONFORMAL:
            return scale * jnp.sum(weights * coeffs) * eye
        return scale * jnp.einsum("n,nij->ij", weights, coeffs)

    return field


def w1inf_distance(field, points: NDArray) -> float:
    """Sampled ``sup |F| + sup |grad F|`` of a matrix or scalar field."""
    pts = jnp.asarray(points, dtype=float)
    values = jax.vmap(field)(pts)
    grads = jax.vmap(jax.jacfwd(field))(pts)
    if values.ndim == 1:
        return float(jnp.max(jnp.abs(values)) + jnp.max(jnp.linalg.norm(grads, axis=-1)))
    grads = jnp.moveaxis(grads, -1, 1)  # (n, k, i, j)
    return float(
        jnp.max(jnp.linalg.norm(values, ord=2, axis=(-2, -1)))
        + jnp.max(jnp.linalg.norm(grads, ord=2, axis=(-2, -1)))
    )


def lipschitz_perturb(
    metric: MetricField,
    eps: float,
    seed: int,
    *,
    box: tuple[tuple[float, float], ...],
    mode: PerturbationMode | str = PerturbationMode.CONFORMAL,
    n_bumps: int = DEFAULT_BUMPS,
    perturb_kappa: bool = False,
    max_retries: int = DEFAULT_MAX_RETRIES,
    n_check: int = DEFAULT_BOUND_SAMPLES,
) -> MetricField:
    """Draw a random Lipschitz metric ``eps``-close to ``metric``.

    Args:
        metric: The base metric.
        eps: Perturbation size in ``W^{1,inf}``.
        seed: Random seed; equal seeds give identical fields.
        box: Region where the bumps live (usually the domain bounding box).
        mode: ``conformal`` (``B = b(x) I``) or ``matrix`` (symmetric ``B(x)``).
        n_bumps: Number of hats.
        perturb_kappa: Also perturb ``kappa`` with an independent bump field.
        max_retries: Redraws allowed when a sample violates positivity.
        n_check: Samples per axis for the positivity and distance checks.

    Returns:
        The perturbed metric (Lipschitz, finite-difference derivatives) with
        ``perturbation_distance`` set. For ``eps = 0`` the input is returned.

    Raises:
        PreconditionError: If ``eps >= lambda_min / 2`` (or ``kappa_min / 2`` when
            ``perturb_kappa``).
        PerturbationError: If every draw violates positivity.
    """
    if eps < 0:
        msg = f"perturbation size must be non-negative, got {eps}"
        raise PreconditionError(msg)
    if eps == 0:
        return metric

    mode = PerturbationMode(mode)
    dim = metric.dim
    points = bound_samples(box, n_check)
    pts = jnp.asarray(points)
    base_g = jax.vmap(metric.g)(pts)
    lam_min = (
        metric.eig_bounds[0]
        if metric.eig_bounds is not None
        else float(jnp.min(jnp.linalg.eigvalsh(base_g)))
    )
    if eps >= lam_min / 2:
        msg = f"eps={eps} must stay below lambda_min/2={lam_min / 2:.4g}"
        raise PreconditionError(msg)
    base_kappa = jax.vmap(metric.kappa)(pts)
    kappa_min = float(jnp.min(base_kappa))
    if perturb_kappa and eps >= kappa_min / 2:
        msg = f"eps={eps} must stay below kappa_min/2={kappa_min / 2:.4g}"
        raise PreconditionError(msg)

    key = jax.random.PRNGKey(seed)
    for attempt in range(max_retries):
        key, k_metric, k_kappa = jax.random.split(key, 3)
        centers, radii, coeffs, bound = _draw_bumps(k_metric, box, n_bumps, mode)
        delta = _bump_field(centers, radii, coeffs, eps / bound, mode, dim)

        def g(x, delta=delta):
            return metric.g(x) + delta(x)

        eigs = jnp.linalg.eigvalsh(jax.vmap(g)(pts))
        if float(jnp.min(eigs)) <= 0:
            logger.debug(f"perturbation draw {attempt} is not positive definite, redrawing")
            continue

        kappa = metric.kappa
        if perturb_kappa:
            kc, kr, kk, kbound = _draw_bumps(k_kappa, box, n_bumps, PerturbationMode.CONFORMAL)

            def dkappa_field(x, kc=kc, kr=kr, kk=kk, kbound=kbound):
                return eps / kbound * jnp.sum(_hats(jnp.asarray(x, dtype=float), kc, kr) * kk)

            def kappa(x, dkappa_field=dkappa_field):
                return metric.kappa(x) + dkappa_field(x)

        def g_inv(x, g=g):
            return jnp.linalg.inv(g(x))

        distance = w1inf_distance(delta, points)
        if perturb_kappa:
            distance = max(distance, w1inf_distance(dkappa_field, points))
        logger.debug(
            f"Perturbed metric (mode={mode}, eps={eps}, seed={seed}): "
            f"measured W1inf distance {distance:.4g}"
        )
        return dataclasses.replace(
            metric,
            g=g,
            g_inv=g_inv,
            dg=finite_difference_derivative(g_inv, dim, DEFAULT_TOLERANCES.h_fd),
            kappa=kappa,
            dkappa=None,
            regularity=Regularity.LIPSCHITZ,
            analytic=False,
            eig_bounds=None,
            kappa_bounds=None,
            lip_modulus=None,
            perturbation_distance=distance,
            name=f"{metric.name}+{eps:g}*bumps[{seed}]",
        )

    msg = f"no positive definite perturbation found in {max_retries} draws"
    raise PerturbationError(msg)
