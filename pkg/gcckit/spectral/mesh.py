"""Simplicial meshes of bounded domains.

Intervals and rectangles get structured tensor meshes (``fd``): with P1
elements and lumped masses these reproduce the conservative three- and
five-point finite difference stencils. Discs and level-set domains get
boundary-fitted Delaunay meshes (``fem``).
"""

import functools
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from loguru import logger
from matplotlib.tri import Triangulation
from scipy.spatial import Delaunay

from gcckit.enums import DomainKind, SolverKind
from gcckit.errors import ConfigurationError, DomainError
from gcckit.geometry.domain import Domain
from gcckit.types import NDArray

DEFAULT_RESOLUTION = 101
MIN_BOUNDARY_SAMPLES = 8

TENSOR_KINDS = (DomainKind.INTERVAL, DomainKind.SQUARE)


@dataclass(frozen=True, eq=False)
class Mesh:
    """Nodes and simplices of a domain with its Dirichlet nodes marked.

    Attributes:
        kind: Structured tensor mesh or boundary-fitted mesh.
        domain: The meshed domain.
        nodes: Node coordinates, shape ``(n, d)``.
        cells: Vertex indices of the simplices, shape ``(m, d + 1)``.
        boundary: Mask of boundary nodes.
        spacing: Nominal mesh size ``dx``.
    """

    kind: SolverKind
    domain: Domain
    nodes: NDArray
    cells: NDArray
    boundary: NDArray
    spacing: float

    @property
    def dim(self) -> int:
        return self.nodes.shape[1]

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @functools.cached_property
    def interior(self) -> NDArray:
        return np.flatnonzero(~self.boundary)

    @functools.cached_property
    def cell_volumes(self) -> NDArray:
        vertices = self.nodes[self.cells]
        edges = vertices[:, 1:] - vertices[:, :1]
        return np.abs(np.linalg.det(edges)) / math.factorial(self.dim)

    @functools.cached_property
    def lumped_volumes(self) -> NDArray:
        """Share of the cell volumes carried by each node."""
        shares = np.repeat(self.cell_volumes / (self.dim + 1), self.dim + 1)
        return np.bincount(self.cells.ravel(), weights=shares, minlength=self.n_nodes)

    @functools.cached_property
    def triangulation(self) -> Triangulation:
        if self.dim != 2:
            msg = "triangulations exist for 2D meshes only"
            raise ConfigurationError(msg)
        return Triangulation(self.nodes[:, 0], self.nodes[:, 1], self.cells)

    def interpolation_matrix(self, points: NDArray) -> sp.csr_matrix:
        """Sparse ``(p, n)`` matrix of P1 interpolation at ``points``.

        Points outside the mesh get an empty row (value 0, the Dirichlet value).
        """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        n_points = points.shape[0]
        if self.dim == 1:
            x = self.nodes[:, 0]
            order = np.argsort(x)
            xs = x[order]
            right = np.clip(np.searchsorted(xs, points[:, 0], side="right"), 1, len(xs) - 1)
            left = right - 1
            frac = (points[:, 0] - xs[left]) / (xs[right] - xs[left])
            inside = (points[:, 0] >= xs[0]) & (points[:, 0] <= xs[-1])
            rows = np.repeat(np.arange(n_points)[inside], 2)
            cols = np.stack([order[left], order[right]], axis=1)[inside].ravel()
            vals = np.stack([1.0 - frac, frac], axis=1)[inside].ravel()
        else:
            found = self.triangulation.get_trifinder()(points[:, 0], points[:, 1])
            inside = found >= 0
            tri = self.cells[found[inside]]
            vertices = self.nodes[tri]
            edges = vertices[:, 1:] - vertices[:, :1]
            local = np.linalg.solve(edges.transpose(0, 2, 1), (points[inside] - vertices[:, 0])[..., None])[..., 0]
            weights = np.concatenate([1.0 - local.sum(axis=1, keepdims=True), local], axis=1)
            rows = np.repeat(np.flatnonzero(inside), 3)
            cols = tri.ravel()
            vals = weights.ravel()
        return sp.csr_matrix((vals, (rows, cols)), shape=(n_points, self.n_nodes))

    def interpolate(self, values: NDArray, points: NDArray) -> NDArray:
        """Evaluate nodal values (``(n,)`` or ``(n, k)``) at points."""
        return self.interpolation_matrix(points) @ np.asarray(values)


# ------------------------------------------------------------------------------
# Mesh builders
# ------------------------------------------------------------------------------


def tensor_mesh(domain: Domain, resolution: int = DEFAULT_RESOLUTION) -> Mesh:
    """Structured mesh of an interval or rectangle with ``resolution`` nodes per unit axis span."""
    if domain.kind not in TENSOR_KINDS:
        msg = f"tensor meshes need an interval or a rectangle, got {domain.kind}"
        raise ConfigurationError(msg)
    if resolution < 3:
        msg = f"resolution must be at least 3, got {resolution}"
        raise ConfigurationError(msg)

    (a, b), *rest = domain.bounding_box
    h = (b - a) / (resolution - 1)
    if domain.dim == 1:
        nodes = np.linspace(a, b, resolution)[:, None]
        cells = np.stack([np.arange(resolution - 1), np.arange(1, resolution)], axis=1)
        boundary = np.zeros(resolution, dtype=bool)
        boundary[[0, -1]] = True
        return Mesh(SolverKind.FD, domain, nodes, cells, boundary, h)

    ((c, d),) = rest
    nx, ny = resolution, max(round((d - c) / h) + 1, 3)
    xs, ys = np.linspace(a, b, nx), np.linspace(c, d, ny)
    nodes = np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1).reshape(-1, 2)
    index = np.arange(nx * ny).reshape(nx, ny)
    v00, v10 = index[:-1, :-1].ravel(), index[1:, :-1].ravel()
    v01, v11 = index[:-1, 1:].ravel(), index[1:, 1:].ravel()
    cells = np.concatenate([np.stack([v00, v10, v11], 1), np.stack([v00, v11, v01], 1)])
    i, j = np.divmod(np.arange(nx * ny), ny)
    boundary = (i == 0) | (i == nx - 1) | (j == 0) | (j == ny - 1)
    return Mesh(SolverKind.FD, domain, nodes, cells, boundary, h)


def fitted_mesh(domain: Domain, resolution: int = DEFAULT_RESOLUTION) -> Mesh:
    """Boundary-fitted Delaunay mesh of a bounded 2D domain.

    Boundary nodes are ``q(sigma)`` at spacing ``dx`` (plus the corners); interior
    nodes are the tensor grid points at level ``phi >= dx / 2``.

    Raises:
        DomainError: For unbounded domains.
    """
    if domain.kind == DomainKind.HALF_PLANE:
        msg = "the spectral solver needs a bounded domain, got a half-plane"
        raise DomainError(msg)
    if domain.dim != 2:
        return tensor_mesh(domain, resolution)

    extent = max(hi - lo for lo, hi in domain.bounding_box)
    h = extent / (resolution - 1)
    n_boundary = max(int(np.ceil(domain.boundary_length / h)), MIN_BOUNDARY_SAMPLES)
    sigmas = np.union1d(domain.boundary_parameters(n_boundary), np.asarray(domain.corners))
    boundary_nodes = np.array([np.asarray(domain.boundary_point(s)) for s in sigmas])
    interior_nodes = domain.interior_grid(h, margin=0.5 * h)
    nodes = np.vstack([boundary_nodes, interior_nodes])

    cells = Delaunay(nodes).simplices
    centroids = nodes[cells].mean(axis=1)
    vertices = nodes[cells]
    edges = vertices[:, 1:] - vertices[:, :1]
    areas = 0.5 * np.abs(np.linalg.det(edges))
    keep = (np.asarray(domain.phi(centroids)) > 0) & (areas > 1e-10 * h**2)
    cells = cells[keep]

    boundary = np.zeros(len(nodes), dtype=bool)
    boundary[: len(boundary_nodes)] = True
    used = np.unique(cells)
    renumber = np.full(len(nodes), -1)
    renumber[used] = np.arange(len(used))
    nodes, boundary, cells = nodes[used], boundary[used], renumber[cells]
    logger.debug(
        f"Fitted mesh of {domain.name}: {len(nodes)} nodes "
        f"({len(boundary_nodes)} on the boundary), {len(cells)} cells"
    )
    return Mesh(SolverKind.FEM, domain, nodes, cells, boundary, h)


MESH_BUILDERS = {
    SolverKind.FD: tensor_mesh,
    SolverKind.FEM: fitted_mesh,
}


def create_mesh(
    domain: Domain,
    resolution: int = DEFAULT_RESOLUTION,
    solver: SolverKind | str | None = None,
) -> Mesh:
    """Mesh a domain with the default solver for its kind unless one is requested."""
    if domain.kind == DomainKind.HALF_PLANE:
        msg = "the spectral solver needs a bounded domain, got a half-plane"
        raise DomainError(msg)
    if solver is None:
        solver = SolverKind.FD if domain.kind in TENSOR_KINDS else SolverKind.FEM
    return MESH_BUILDERS[SolverKind(solver)](domain, resolution)
