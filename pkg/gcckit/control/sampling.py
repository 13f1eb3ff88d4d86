"""Phase-space sampling for the control checkers.

Samples are characteristic points with ``tau = +1`` and g-unit velocity.
Points with ``tau = -1`` describe the same spatial rays run backwards
(see `flip_covector`), so sampling ``tau = +1`` covers every direction.
"""

from dataclasses import dataclass

import numpy as np

from gcckit.errors import ConfigurationError
from gcckit.geometry.domain import Domain
from gcckit.geometry.hamiltonian import PhasePoint, phase_point_from_direction
from gcckit.geometry.metric import MetricField
from gcckit.types import NDArray

DEFAULT_SPACING = 0.05
DEFAULT_ANGLES = 16
DEFAULT_MARGIN = 0.01
DEFAULT_REFINE_FACTOR = 4


@dataclass(frozen=True)
class SamplingSpec:
    """Tensor grid over positions and directions.

    Attributes:
        spacing: Spacing of the position grid.
        n_angles: Number of uniformly spaced directions in 2D (1D always uses
            both directions).
        margin: Minimal distance (level-set value) of positions from the boundary.
        refine_factor: Grid refinement around failing samples.
    """

    spacing: float = DEFAULT_SPACING
    n_angles: int = DEFAULT_ANGLES
    margin: float = DEFAULT_MARGIN
    refine_factor: int = DEFAULT_REFINE_FACTOR

    def __post_init__(self):
        if self.spacing <= 0:
            msg = f"sampling spacing must be positive, got {self.spacing}"
            raise ConfigurationError(msg)
        if self.n_angles < 1:
            msg = f"need at least one direction, got {self.n_angles}"
            raise ConfigurationError(msg)
        if self.margin < 0:
            msg = f"sampling margin must be non-negative, got {self.margin}"
            raise ConfigurationError(msg)
        if self.refine_factor < 2:
            msg = f"refine_factor must be at least 2, got {self.refine_factor}"
            raise ConfigurationError(msg)

    def refined(self) -> "SamplingSpec":
        return SamplingSpec(
            spacing=self.spacing / self.refine_factor,
            n_angles=self.n_angles * self.refine_factor,
            margin=self.margin,
            refine_factor=self.refine_factor,
        )

    def to_dict(self) -> dict:
        return {
            "spacing": self.spacing,
            "n_angles": self.n_angles,
            "margin": self.margin,
            "refine_factor": self.refine_factor,
        }


def directions(dim: int, n_angles: int, offset: float = 0.0) -> NDArray:
    """Unit Euclidean directions: ``+-1`` in 1D, ``n_angles`` angles in 2D."""
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    angles = offset + 2.0 * np.pi * np.arange(n_angles) / n_angles
    return np.stack([np.cos(angles), np.sin(angles)], axis=-1)


def _phase_points(metric: MetricField, points: NDArray, dirs: NDArray) -> list[PhasePoint]:
    return [
        phase_point_from_direction(metric, x, direction, tau=1.0)
        for x in points
        for direction in dirs
    ]


def phase_space_samples(
    metric: MetricField, domain: Domain, spec: SamplingSpec | None = None
) -> list[PhasePoint]:
    """All grid samples ``(x, direction)`` of the domain, ``tau = +1``, ``t = 0``.

    Raises:
        ConfigurationError: If no grid point keeps the margin.
    """
    spec = spec or SamplingSpec()
    points = domain.interior_grid(spec.spacing, spec.margin)
    if len(points) == 0:
        msg = f"sampling grid with spacing {spec.spacing} has no interior point"
        raise ConfigurationError(msg)
    return _phase_points(metric, points, directions(domain.dim, spec.n_angles))


def local_samples(
    metric: MetricField,
    domain: Domain,
    rho: PhasePoint,
    spec: SamplingSpec,
) -> list[PhasePoint]:
    """Refined samples in a grid cell around a (failing) sample.

    Positions form a ``3^d`` stencil at ``spacing / refine_factor``; in 2D the
    directions fan out over one angular cell of the coarse grid.
    """
    step = spec.spacing / spec.refine_factor
    offsets = np.stack(
        np.meshgrid(*([np.array([-step, 0.0, step])] * domain.dim), indexing="ij"), axis=-1
    ).reshape(-1, domain.dim)
    points = np.asarray(rho.x)[None, :] + offsets
    keep = np.array([domain.contains(x, tol=-spec.margin) for x in points], dtype=bool)
    points = points[keep]
    if domain.dim == 1:
        dirs = np.sign(np.asarray(rho.xi) * -rho.tau).reshape(1, 1)
    else:
        v = -np.asarray(metric.g_inv(rho.x) @ rho.xi) / rho.tau
        center = np.arctan2(v[1], v[0])
        cell = 2.0 * np.pi / spec.n_angles
        angles = center + cell * np.linspace(-0.5, 0.5, spec.refine_factor + 1)
        dirs = np.stack([np.cos(angles), np.sin(angles)], axis=-1)
    return _phase_points(metric, points, dirs)
