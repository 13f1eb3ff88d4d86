import numpy as np
import pytest

from gcckit.dynamics import BranchPolicy, advance_generalized
from gcckit.enums import GlancingRule, SegmentKind
from gcckit.errors import ConfigurationError, PreconditionError
from gcckit.geometry import PhasePoint, phase_point_from_direction, time_reverse

from .cases.billiards import case_disc, case_disc_radial, case_interval, case_square


def trace(case, x, direction, t_end, policy=None, **kwargs):
    rho = phase_point_from_direction(case.metric, x, direction)
    return advance_generalized(case.metric, case.chart, rho, t_end, policy, **kwargs)


def test_interval_unfolding():
    case = case_interval()
    (trajectory,) = trace(case, [0.2], [-1.0], 2.0)
    assert not trajectory.truncated
    assert [jump.t for jump in trajectory.jumps] == pytest.approx([0.2, 1.2], abs=1e-9)
    np.testing.assert_allclose(trajectory.jumps[0].before.x, [0.0], atol=1e-12)
    np.testing.assert_allclose(trajectory.jumps[1].before.x, [1.0], atol=1e-12)
    np.testing.assert_allclose(trajectory.position_at(2.0), [0.2], atol=1e-9)
    np.testing.assert_allclose(trajectory.position_at(0.7), [0.5], atol=1e-9)


def test_square_bouncing_ball():
    case = case_square()
    (trajectory,) = trace(case, [0.5, 0.5], [0.0, 1.0], 5.0)
    np.testing.assert_allclose(trajectory.positions[:, 0], 0.5, atol=1e-12)
    assert [jump.t for jump in trajectory.jumps] == pytest.approx(
        [0.5, 1.5, 2.5, 3.5, 4.5], abs=1e-9
    )


def test_square_corner_is_a_double_reflection():
    case = case_square()
    (trajectory,) = trace(case, [0.5, 0.5], [1.0, 1.0], 1.5)
    assert len(trajectory.jumps) == 2
    np.testing.assert_allclose(trajectory.position_at(np.sqrt(2.0)), [0.5, 0.5], atol=1e-8)


def test_disc_billiard_subtends_equal_arcs():
    case = case_disc()
    (trajectory,) = trace(case, [0.3, 0.0], [0.0, 1.0], 42.0)
    assert len(trajectory.jumps) >= 20
    angles = np.array([np.arctan2(j.before.x[1], j.before.x[0]) for j in trajectory.jumps])
    arcs = np.mod(np.diff(angles), 2 * np.pi)
    np.testing.assert_allclose(arcs, arcs[0], atol=1e-6)

    frames = [case.chart.frame(j.sigma) for j in trajectory.jumps]
    incidence = [frame.zeta(j.before.xi) for frame, j in zip(frames, trajectory.jumps)]
    np.testing.assert_allclose(incidence, incidence[0], atol=1e-6)


def test_jump_law_in_chart_coordinates():
    case = case_disc_radial()
    (trajectory,) = trace(case, [0.1, -0.2], [1.0, 0.4], 4.0)
    assert trajectory.jumps
    for jump in trajectory.jumps:
        before = case.chart.to_chart(jump.before)
        after = case.chart.to_chart(jump.after)
        assert after.tau == before.tau
        np.testing.assert_allclose(after.xi_tan, before.xi_tan, atol=1e-12)
        assert after.zeta == pytest.approx(-before.zeta, abs=1e-12)
        assert before.zeta > 0


def test_time_reversal_retraces_the_ray():
    case = case_disc()
    rho = phase_point_from_direction(case.metric, [0.2, -0.1], [0.3, 1.0])
    (forward,) = advance_generalized(case.metric, case.chart, rho, 3.0)
    (backward,) = advance_generalized(case.metric, case.chart, time_reverse(forward.end), 0.0)
    np.testing.assert_allclose(backward.end.x, rho.x, atol=1e-6)
    assert len(backward.jumps) == len(forward.jumps)


def test_tangent_start_glides_along_the_circle():
    case = case_disc()
    rho = PhasePoint(t=0.0, x=np.array([1.0, 0.0]), tau=1.0, xi=np.array([0.0, -1.0]))
    (trajectory,) = advance_generalized(case.metric, case.chart, rho, 1.0)
    assert trajectory.segments[0].kind == SegmentKind.GLIDING
    np.testing.assert_allclose(np.linalg.norm(trajectory.positions, axis=1), 1.0, atol=1e-12)
    np.testing.assert_allclose(trajectory.position_at(1.0), [np.cos(1.0), np.sin(1.0)], atol=1e-6)


def test_order_three_branches_split_by_branch_id():
    case = case_square()
    rho = PhasePoint(t=0.0, x=np.array([0.5, 0.0]), tau=1.0, xi=np.array([-1.0, 0.0]))
    gliding, interior = advance_generalized(
        case.metric, case.chart, rho, 0.4, BranchPolicy(n_branches=2)
    )
    assert gliding.segments[0].kind == SegmentKind.GLIDING
    assert all(segment.kind == SegmentKind.INTERIOR for segment in interior.segments)
    for trajectory in (gliding, interior):
        np.testing.assert_allclose(trajectory.position_at(0.4), [0.9, 0.0], atol=1e-9)

    (first,) = advance_generalized(
        case.metric,
        case.chart,
        rho,
        0.4,
        BranchPolicy(glancing_rule=GlancingRule.INTERIOR_FIRST),
    )
    assert first.segments[0].kind == SegmentKind.INTERIOR


def test_unjittered_branches_agree():
    case = case_disc_radial()
    branches = trace(case, [0.1, 0.2], [1.0, -0.3], 3.0, BranchPolicy(n_branches=3))
    assert [trajectory.branch_id for trajectory in branches] == [0, 1, 2]
    for trajectory in branches[1:]:
        np.testing.assert_array_equal(trajectory.states, branches[0].states)


def test_event_cap_truncates():
    case = case_interval()
    (trajectory,) = trace(case, [0.5], [1.0], 50.0, max_events=3)
    assert trajectory.truncated
    assert "event cap" in trajectory.diagnostic
    assert len(trajectory.events) == 3


def test_rows_are_time_ordered():
    case = case_interval()
    (trajectory,) = trace(case, [0.2], [-1.0], 2.0)
    rows = trajectory.to_rows()
    times = [row[2] for row in rows]
    assert times == sorted(times)
    assert len(rows[0]) == 1 + 1 + 4 + 1
    assert sum(1 for row in rows if row[-1]) == len(trajectory.events)


def test_invalid_requests():
    case = case_square()
    with pytest.raises(ConfigurationError):
        BranchPolicy(n_branches=0)
    with pytest.raises(ConfigurationError):
        BranchPolicy(jitter=-1.0)
    rho = phase_point_from_direction(case.metric, [0.5, 0.5], [1.0, 0.0])
    with pytest.raises(PreconditionError):
        advance_generalized(case.metric, case.chart, rho, -1.0)
    with pytest.raises(PreconditionError):
        advance_generalized(case_disc().metric, case.chart, rho, 1.0)
