import numpy as np
import pytest

from gcckit.control import (
    SamplingSpec,
    check_boundary_gcc,
    check_interior_gcc,
    check_weak_gcc,
    create_interval_region,
    create_whole_region,
    estimate_T_gcc,
    first_interior_hit,
    perturbation_sweep,
    refine_failures,
    verify_witness,
)
from gcckit.dynamics import BranchPolicy, advance_generalized
from gcckit.enums import GccMode, Verdict
from gcckit.errors import PreconditionError
from gcckit.geometry import phase_point_from_direction, scaled_metric, velocity

from .cases.configurations import (
    case_disc_boundary,
    case_interval_left_end,
    case_interval_window,
    case_square_strip,
)


@pytest.fixture(scope="module")
def window():
    return case_interval_window()


@pytest.fixture(scope="module")
def strip():
    return case_square_strip()


# ------------------------------------------------------------------------------
# Interior control
# ------------------------------------------------------------------------------


def test_interval_window_controls_after_its_unfolding_time(window):
    report = check_interior_gcc(*window.args(), 1.0, window.sampling, chart=window.chart)
    assert report.verdict == Verdict.HOLDS
    assert report.coverage == 1.0
    assert report.witnesses == []

    short = check_interior_gcc(*window.args(), 0.7, window.sampling, chart=window.chart)
    assert short.verdict == Verdict.FAILS
    for witness in short.witnesses:
        assert witness.rho.x[0] > 0.6
        assert velocity(window.metric, witness.rho)[0] > 0


def test_bouncing_balls_escape_the_strip(strip):
    report = check_interior_gcc(*strip.args(), 3.0, strip.sampling, chart=strip.chart)
    assert report.verdict == Verdict.FAILS
    assert 0 < len(report.witnesses) <= 10
    assert 0.0 < report.coverage < 1.0
    for witness in report.witnesses:
        v = velocity(strip.metric, witness.rho)
        assert abs(v[0]) < 1e-12
        assert witness.rho.x[0] >= 0.3 - 1e-12
    assert any(0.3 < w.rho.x[0] < 1.0 for w in report.witnesses)
    assert verify_witness(*strip.args(), report.witnesses[0], 3.0)


def test_whole_domain_controls_instantly(strip):
    region = create_whole_region(strip.domain)
    report = check_interior_gcc(strip.metric, strip.domain, region, 1e-3, strip.sampling, chart=strip.chart)
    assert report.verdict == Verdict.HOLDS


def test_larger_regions_control_sooner(window):
    inner = check_interior_gcc(*window.args(), 0.7, window.sampling, chart=window.chart)
    outer_region = create_interval_region(0.2, 0.7)
    outer = check_interior_gcc(
        window.metric, window.domain, outer_region, 0.7, window.sampling, chart=window.chart
    )
    assert inner.verdict == Verdict.FAILS
    assert outer.verdict == Verdict.HOLDS
    assert outer.coverage >= inner.coverage


def test_thin_regions_are_not_tunnelled(window):
    rho = phase_point_from_direction(window.metric, [0.2], [1.0])
    (trajectory,) = advance_generalized(window.metric, window.chart, rho, 1.0)
    region = create_interval_region(0.512, 0.513)
    assert first_interior_hit(trajectory, region) == pytest.approx(0.312, abs=1e-9)


# ------------------------------------------------------------------------------
# Boundary control
# ------------------------------------------------------------------------------


def test_left_endpoint_needs_two_crossings():
    case = case_interval_left_end()
    assert check_boundary_gcc(*case.args(), 2.5, case.sampling, chart=case.chart).verdict == Verdict.HOLDS

    report = check_boundary_gcc(*case.args(), 1.5, case.sampling, chart=case.chart)
    assert report.verdict == Verdict.FAILS
    worst = report.witnesses[0]
    assert worst.rho.x[0] < 0.5
    assert velocity(case.metric, worst.rho)[0] > 0


def test_disc_boundary_is_reached_along_every_chord():
    case = case_disc_boundary()
    report = check_boundary_gcc(*case.args(), 2.2, case.sampling, chart=case.chart)
    assert report.verdict == Verdict.HOLDS
    assert report.truncated_branches == 0


def test_checkers_reject_the_wrong_region_kind(window):
    boundary = case_interval_left_end()
    with pytest.raises(PreconditionError):
        check_boundary_gcc(*window.args(), 1.0, window.sampling)
    with pytest.raises(PreconditionError):
        check_interior_gcc(*boundary.args(), 1.0, boundary.sampling)
    with pytest.raises(PreconditionError):
        check_weak_gcc(*window.args(), 1.0, window.sampling)
    with pytest.raises(PreconditionError):
        check_interior_gcc(*window.args(), 0.0, window.sampling)


# ------------------------------------------------------------------------------
# Weak control
# ------------------------------------------------------------------------------


def test_weak_control_is_implied_by_strong_control(window):
    policy = BranchPolicy(n_branches=2, jitter=1e-3, rng_seed=1)
    strong = check_interior_gcc(*window.args(), 1.0, window.sampling, policy, chart=window.chart)
    weak = check_weak_gcc(
        window.metric,
        window.domain,
        window.region.dilate(0.01),
        1.0,
        window.sampling,
        policy,
        chart=window.chart,
    )
    assert strong.verdict == Verdict.HOLDS
    assert weak.verdict == Verdict.HOLDS
    assert weak.coverage >= strong.coverage


@pytest.mark.parametrize("T", [0.7, 1.0])
def test_single_branch_collapses_weak_and_strong(window, T):
    strong = check_interior_gcc(*window.args(), T, window.sampling, chart=window.chart)
    weak = check_weak_gcc(
        window.metric, window.domain, window.region.dilate(1e-9), T, window.sampling, chart=window.chart
    )
    assert weak.verdict == strong.verdict
    assert weak.n_pass == strong.n_pass


def test_dilated_strip_still_misses_the_bouncing_ball(strip):
    report = check_weak_gcc(
        strip.metric, strip.domain, strip.region.dilate(0.05), 3.0, strip.sampling, chart=strip.chart
    )
    assert report.verdict == Verdict.FAILS
    assert report.mode == GccMode.WEAK


# ------------------------------------------------------------------------------
# Control time
# ------------------------------------------------------------------------------


def test_control_time_of_the_window(window):
    estimate = estimate_T_gcc(*window.args(), 2.0, window.sampling, chart=window.chart)
    assert estimate.monotone
    assert 0.78 <= estimate.value <= 0.81
    assert estimate.upper - estimate.lower <= 0.01
    verdicts = dict(estimate.trace)
    for T, verdict in verdicts.items():
        assert (verdict == Verdict.HOLDS) == (T >= estimate.value)


def test_control_time_of_the_left_endpoint():
    case = case_interval_left_end()
    estimate = estimate_T_gcc(*case.args(), 3.0, case.sampling, chart=case.chart)
    assert 1.97 <= estimate.value <= 2.01


def test_recomputed_bisection_agrees(window):
    cached = estimate_T_gcc(*window.args(), 2.0, window.sampling, chart=window.chart, resolution=0.05)
    fresh = estimate_T_gcc(
        *window.args(), 2.0, window.sampling, chart=window.chart, resolution=0.05, recompute=True
    )
    assert fresh.value == pytest.approx(cached.value)


def test_trapped_orbits_give_infinite_control_time(strip):
    estimate = estimate_T_gcc(*strip.args(), 2.5, strip.sampling, chart=strip.chart)
    assert estimate.value == np.inf
    assert estimate.to_dict()["T_gcc"] is None


# ------------------------------------------------------------------------------
# Perturbations
# ------------------------------------------------------------------------------


def test_small_perturbations_keep_control(window):
    rows = perturbation_sweep(*window.args(), 1.0, [0.0, 0.02], 2, window.sampling)
    assert [row["eps"] for row in rows] == [0.0, 0.02]
    assert [row["pass_rate"] for row in rows] == [1.0, 1.0]


def test_halving_the_speed_breaks_control(window):
    def slow_down(metric, eps, seed, **kwargs):
        return scaled_metric(metric, (1.0 + eps) ** 2)

    (row,) = perturbation_sweep(*window.args(), 1.0, [1.0], 1, window.sampling, perturb=slow_down)
    assert row["passes"] == 0


def test_sweep_needs_a_controlled_base(window):
    with pytest.raises(PreconditionError):
        perturbation_sweep(*window.args(), 0.5, [0.01], 1, window.sampling)


def test_refinement_keeps_only_the_trapped_directions(strip):
    coarse = SamplingSpec(spacing=0.5, n_angles=4)
    report = check_interior_gcc(*strip.args(), 3.0, coarse, chart=strip.chart)
    assert report.verdict == Verdict.FAILS
    refined = refine_failures(*strip.args(), report, chart=strip.chart)
    assert refined.sampling.spacing == pytest.approx(0.125)
    assert refined.n_samples > report.n_samples
    assert refined.verdict == Verdict.FAILS
    for witness in refined.witnesses:
        assert abs(velocity(strip.metric, witness.rho)[0]) < 1e-12
