"""Reach tubes: the union of all traced branches through a point, in a time window."""

from dataclasses import dataclass

import numpy as np
from loguru import logger
from scipy.spatial import cKDTree

from gcckit.dynamics.generalized import BranchPolicy, GeneralizedTrajectory, advance_generalized
from gcckit.geometry.collar import CollarChart
from gcckit.geometry.hamiltonian import PhasePoint, time_reverse
from gcckit.geometry.metric import MetricField
from gcckit.types import NDArray


@dataclass(frozen=True)
class ReachTube:
    """Sampled ``Gamma^T(rho0)`` with nearest-sample queries.

    Attributes:
        states: Packed samples ``(t, x, tau, xi)`` with ``|t - t0| <= T``.
        branch_ids: Branch of each sample.
        thickness: Largest spatial distance between a branch ``b > 0`` and branch 0
            at equal times.
        trajectories: The traced branches (forward and backward).
        tree: Nearest-sample index over ``(t, x, xi)``.
        spatial_tree: Nearest-sample index over ``(t, x)``.
    """

    states: NDArray
    branch_ids: NDArray
    thickness: float
    trajectories: tuple[GeneralizedTrajectory, ...]
    tree: cKDTree
    spatial_tree: cKDTree

    @property
    def dim(self) -> int:
        return (self.states.shape[-1] - 2) // 2

    def distance(self, rho: PhasePoint) -> float:
        """Distance from ``(t, x, xi)`` of ``rho`` to the nearest sample."""
        query = np.concatenate([[rho.t], np.asarray(rho.x, dtype=float), np.asarray(rho.xi, dtype=float)])
        return float(self.tree.query(query)[0])

    def spacetime_distance(self, t: float, x: NDArray) -> float:
        """Distance from ``(t, x)`` to the space-time projection of the tube."""
        return float(self.spatial_tree.query(np.concatenate([[t], np.asarray(x, dtype=float)]))[0])


def _drop_tau(states: NDArray) -> NDArray:
    d = (states.shape[-1] - 2) // 2
    return np.delete(states, 1 + d, axis=1)


def _reverse_states(states: NDArray) -> NDArray:
    d = (states.shape[-1] - 2) // 2
    states = states.copy()
    states[:, 0] = -states[:, 0]
    states[:, 1 + d] = -states[:, 1 + d]
    return states


def _spread(trajectories: list[GeneralizedTrajectory]) -> float:
    """Largest distance between a branch and branch 0 at equal times."""
    base = trajectories[0]
    spread = 0.0
    for trajectory in trajectories[1:]:
        for t, x in zip(trajectory.times, trajectory.positions):
            spread = max(spread, float(np.linalg.norm(x - base.position_at(t))))
    return spread


def reach_tube(
    metric: MetricField,
    chart: CollarChart,
    rho0: PhasePoint,
    T: float,
    policy: BranchPolicy | None = None,
    *,
    both_directions: bool = True,
    **kwargs,
) -> ReachTube:
    """Sample the union of all branches through ``rho0`` within ``|t - t0| <= T``.

    Args:
        metric: The metric field.
        chart: Collar chart of the domain.
        rho0: Characteristic point.
        T: Half-width of the time window.
        policy: Branching policy.
        both_directions: Also trace backwards in time through the time reversal.
        **kwargs: Forwarded to `advance_generalized`.

    Returns:
        The tube.
    """
    policy = policy or BranchPolicy()
    forward = advance_generalized(metric, chart, rho0, (rho0.t, rho0.t + T), policy, **kwargs)
    trajectories = list(forward)
    backward = []
    pieces = [(trajectory.branch_id, trajectory.states) for trajectory in forward]
    if both_directions:
        reversed_start = time_reverse(rho0)
        backward = advance_generalized(
            metric, chart, reversed_start, (reversed_start.t, reversed_start.t + T), policy, **kwargs
        )
        trajectories += backward
        pieces += [(trajectory.branch_id, _reverse_states(trajectory.states)) for trajectory in backward]

    states = np.concatenate([states for _, states in pieces], axis=0)
    branch_ids = np.concatenate([np.full(len(states), b) for b, states in pieces])
    keep = np.abs(states[:, 0] - rho0.t) <= T + 1e-12
    states, branch_ids = states[keep], branch_ids[keep]

    d = (states.shape[-1] - 2) // 2
    thickness = max(_spread(forward), _spread(backward) if both_directions else 0.0)
    # tau is constant along the tube, so it is left out of the distance
    points = _drop_tau(states)
    logger.debug(f"reach tube: {len(states)} samples, {policy.n_branches} branches, thickness={thickness:.3e}")
    return ReachTube(
        states=states,
        branch_ids=branch_ids,
        thickness=thickness,
        trajectories=tuple(trajectories),
        tree=cKDTree(points),
        spatial_tree=cKDTree(states[:, : 1 + d]),
    )
