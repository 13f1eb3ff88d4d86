import numpy as np
import pytest

from gcckit.dynamics import BranchPolicy, reach_tube
from gcckit.geometry import phase_point_from_direction

from .cases.billiards import case_disc_radial, case_interval


def test_interval_tube_is_the_zigzag():
    case = case_interval()
    rho = phase_point_from_direction(case.metric, [0.2], [-1.0])
    tube = reach_tube(case.metric, case.chart, rho, 1.0)
    assert tube.thickness == 0.0
    assert np.all(np.abs(tube.states[:, 0]) <= 1.0 + 1e-12)
    assert tube.distance(rho) == pytest.approx(0.0, abs=1e-12)
    # backwards in time the ray came from the right
    assert tube.spacetime_distance(-0.3, np.array([0.5])) == pytest.approx(0.0, abs=0.05)
    assert tube.spacetime_distance(0.5, np.array([0.9])) > 0.2


def test_unjittered_branches_give_a_thin_tube():
    case = case_disc_radial()
    rho = phase_point_from_direction(case.metric, [0.1, 0.2], [1.0, -0.3])
    tube = reach_tube(case.metric, case.chart, rho, 2.0, BranchPolicy(n_branches=3))
    assert tube.thickness == 0.0
    assert set(np.unique(tube.branch_ids)) == {0, 1, 2}


def test_thickness_grows_with_jitter():
    case = case_disc_radial()
    rho = phase_point_from_direction(case.metric, [0.1, 0.2], [1.0, -0.3])
    thickness = [
        reach_tube(
            case.metric,
            case.chart,
            rho,
            2.0,
            BranchPolicy(n_branches=3, jitter=jitter, rng_seed=4),
            both_directions=False,
        ).thickness
        for jitter in (1e-4, 1e-2)
    ]
    assert 0.0 < thickness[0] < thickness[1]
