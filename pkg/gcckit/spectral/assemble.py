"""Assembly and eigendecomposition of the Dirichlet operator ``-A_{kappa,g}``.

The weak form ``int kappa sqrt(det g) g^ij d_i u d_j v dx = lambda int kappa sqrt(det g) u v dx``
is discretised with P1 elements (coefficients sampled at cell centroids) and a
lumped, weighted mass matrix ``M``. Eigenpairs of ``K e = lambda M e`` come from
shift-invert Lanczos on ``M^{-1/2} K M^{-1/2}`` and are re-orthonormalised in
the weighted inner product ``<u, v> = sum u conj(v) kappa sqrt(det g) dV``.
"""

from dataclasses import dataclass

import jax
import jax.numpy as jnp
import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg
from loguru import logger

from gcckit.enums import SolverKind
from gcckit.errors import ConfigurationError, SpectralBandError
from gcckit.geometry.domain import Domain
from gcckit.geometry.metric import MetricField
from gcckit.spectral.mesh import DEFAULT_RESOLUTION, Mesh, create_mesh
from gcckit.types import NDArray

DEFAULT_BAND_SAFETY = 0.1
ARNOLDI_SEED = 0

# ------------------------------------------------------------------------------
# Coefficients and assembly
# ------------------------------------------------------------------------------


def volume_weight(metric: MetricField, points: NDArray) -> NDArray:
    """``kappa(x) sqrt(det g(x))`` at a batch of points."""

    def weight(x):
        return metric.kappa(x) * jnp.sqrt(jnp.linalg.det(metric.g(x)))

    return np.asarray(jax.vmap(weight)(jnp.asarray(points, dtype=float)))


def _conductivity(metric: MetricField, points: NDArray) -> NDArray:
    def conductivity(x):
        return metric.kappa(x) * jnp.sqrt(jnp.linalg.det(metric.g(x))) * metric.g_inv(x)

    return np.asarray(jax.vmap(conductivity)(jnp.asarray(points, dtype=float)))


def _p1_gradients(mesh: Mesh) -> NDArray:
    """Gradients of the barycentric coordinates, shape ``(m, d + 1, d)``."""
    d = mesh.dim
    vertices = mesh.nodes[mesh.cells]
    edges = vertices[:, 1:] - vertices[:, :1]
    reference = np.concatenate([-np.ones((1, d)), np.eye(d)], axis=0)
    return np.einsum("ak,mkj->maj", reference, np.linalg.inv(edges).transpose(0, 2, 1))


def assemble(mesh: Mesh, metric: MetricField) -> tuple[sp.csr_matrix, NDArray]:
    """Stiffness matrix and lumped weighted masses on the full node set.

    Returns:
        ``(K, w)`` with ``K`` the symmetric stiffness matrix and ``w`` the nodal
        masses ``kappa sqrt(det g) * lumped volume``.
    """
    if metric.dim != mesh.dim:
        msg = f"metric of dimension {metric.dim} on a {mesh.dim}D mesh"
        raise ConfigurationError(msg)
    grads = _p1_gradients(mesh)
    centroids = mesh.nodes[mesh.cells].mean(axis=1)
    coeff = _conductivity(metric, centroids)
    local = np.einsum("m,mai,mij,mbj->mab", mesh.cell_volumes, grads, coeff, grads)

    k = mesh.dim + 1
    rows = np.repeat(mesh.cells, k, axis=1).ravel()
    cols = np.tile(mesh.cells, (1, k)).ravel()
    stiffness = sp.coo_matrix((local.ravel(), (rows, cols)), shape=(mesh.n_nodes,) * 2).tocsr()
    masses = volume_weight(metric, mesh.nodes) * mesh.lumped_volumes
    return stiffness, masses


# ------------------------------------------------------------------------------
# Eigenbasis
# ------------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class EigenBasis:
    """Dirichlet eigenpairs on the interior nodes of a mesh.

    Attributes:
        mesh: The mesh.
        metric: The metric the operator was assembled with.
        lambdas: Ascending eigenvalues.
        modes: Eigenvectors on the interior nodes, columns orthonormal in the
            weighted inner product.
        weights: Weighted lumped masses of the interior nodes.
        stiffness: Stiffness matrix restricted to the interior nodes.
    """

    mesh: Mesh
    metric: MetricField
    lambdas: NDArray
    modes: NDArray
    weights: NDArray
    stiffness: sp.csr_matrix

    @property
    def count(self) -> int:
        return len(self.lambdas)

    @property
    def sqrt_lambdas(self) -> NDArray:
        return np.sqrt(self.lambdas)

    @property
    def interior_nodes(self) -> NDArray:
        return self.mesh.nodes[self.mesh.interior]

    def inner(self, u: NDArray, v: NDArray) -> complex:
        """Weighted inner product of interior grid functions (conjugate-linear in ``v``)."""
        return complex(np.sum(u * np.conj(v) * self.weights))

    def norm(self, u: NDArray) -> float:
        return float(np.sqrt(np.real(self.inner(u, u))))

    def expand(self, u: NDArray) -> NDArray:
        """Coefficients ``<u, e_nu>`` of an interior grid function."""
        return self.modes.T @ (self.weights * np.asarray(u))

    def synthesize(self, coefficients: NDArray) -> NDArray:
        return self.modes @ np.asarray(coefficients)

    def to_nodes(self, u: NDArray) -> NDArray:
        """Extend interior values (``(n_int,)`` or ``(n_int, k)``) by zero to every node."""
        u = np.asarray(u)
        full = np.zeros((self.mesh.n_nodes, *u.shape[1:]), dtype=u.dtype)
        full[self.mesh.interior] = u
        return full

    def sample(self, f) -> NDArray:
        """Interior values of a function of ``x`` (batched over points)."""
        return np.asarray(f(jnp.asarray(self.interior_nodes)))

    def apply_operator(self, u: NDArray) -> NDArray:
        """The discrete ``-A``: ``M^{-1} K u``."""
        return (self.stiffness @ np.asarray(u)) / self.weights

    def band_limit(self, safety: float = DEFAULT_BAND_SAFETY) -> float:
        return safety * (np.pi / self.mesh.spacing) ** 2


def _weighted_orthonormalize(modes: NDArray, weights: NDArray) -> NDArray:
    gram = modes.T @ (weights[:, None] * modes)
    factor = scipy.linalg.cholesky(gram, lower=True)
    return scipy.linalg.solve_triangular(factor, modes.T, lower=True).T


def assemble_and_eig(
    domain: Domain,
    metric: MetricField,
    resolution: int = DEFAULT_RESOLUTION,
    count: int = 20,
    *,
    solver: SolverKind | str | None = None,
    safety: float = DEFAULT_BAND_SAFETY,
    mesh: Mesh | None = None,
) -> EigenBasis:
    """Lowest ``count`` Dirichlet eigenpairs of ``-A_{kappa,g}``.

    Args:
        domain: A bounded domain.
        metric: The metric (and ``kappa``).
        resolution: Nodes per axis of the bounding box.
        count: Number of eigenpairs.
        solver: ``fd`` (structured mesh) or ``fem`` (boundary-fitted mesh); the
            default depends on the domain kind.
        safety: Eigenvalues must stay below ``safety * (pi / dx)^2``.
        mesh: A prebuilt mesh, overriding ``resolution`` and ``solver``.

    Returns:
        The eigenbasis.

    Raises:
        SpectralBandError: If ``lambda_count`` is above the trustworthy band; the
            error carries the admissible count.
        DomainError: For unbounded domains.
    """
    mesh = mesh or create_mesh(domain, resolution, solver)
    stiffness, masses = assemble(mesh, metric)
    interior = mesh.interior
    stiffness = stiffness[interior][:, interior].tocsr()
    weights = masses[interior]
    if count < 1 or count >= len(interior) - 1:
        msg = f"cannot compute {count} eigenpairs on {len(interior)} interior nodes"
        raise SpectralBandError(msg, admissible=max(len(interior) - 2, 0))

    scale = sp.diags(1.0 / np.sqrt(weights))
    symmetric = (scale @ stiffness @ scale).tocsc()
    v0 = np.random.default_rng(ARNOLDI_SEED).standard_normal(symmetric.shape[0])
    lambdas, vectors = scipy.sparse.linalg.eigsh(symmetric, k=count, sigma=0.0, which="LM", v0=v0)
    order = np.argsort(lambdas)
    lambdas = lambdas[order]
    modes = _weighted_orthonormalize(vectors[:, order] / np.sqrt(weights)[:, None], weights)
    # fix the sign so that mode values are comparable between runs
    signs = np.sign(modes[np.argmax(np.abs(modes), axis=0), np.arange(count)])
    modes = modes * signs

    basis = EigenBasis(mesh, metric, lambdas, modes, weights, stiffness)
    limit = basis.band_limit(safety)
    if lambdas[-1] > limit:
        admissible = int(np.sum(lambdas <= limit))
        msg = (
            f"lambda_{count}={lambdas[-1]:.4g} exceeds the trustworthy band "
            f"{limit:.4g} at dx={mesh.spacing:.3g}; at most {admissible} eigenpairs are admissible"
        )
        raise SpectralBandError(msg, admissible=admissible)
    logger.info(
        f"Computed {count} Dirichlet eigenpairs on {mesh.kind} mesh "
        f"({len(interior)} unknowns): lambda in [{lambdas[0]:.6g}, {lambdas[-1]:.6g}]"
    )
    return basis
