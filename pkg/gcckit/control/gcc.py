"""Geometric control checkers.

A phase-space sample passes when the generalized bicharacteristic through it
reaches the observation region in ``(0, T)``: every traced branch for the strong
condition, at least one branch for the weak one. For interior regions reaching
means ``x(t)`` enters ``omega``; for boundary regions it means a boundary contact
over ``Gamma`` at an escape point (hyperbolic or gliding). The checkers certify a
sampled set only, and report coverage and truncations along with the verdict.
"""

import warnings
from dataclasses import dataclass, field
from functools import partial

import numpy as np
from loguru import logger

from gcckit.control.regions import ObservationRegion
from gcckit.control.sampling import SamplingSpec, local_samples, phase_space_samples
from gcckit.dynamics.boundary import is_escape_point
from gcckit.dynamics.generalized import (
    BranchPolicy,
    GeneralizedTrajectory,
    advance_generalized,
)
from gcckit.enums import (
    EscapeDirection,
    GccMode,
    PerturbationMode,
    RegionKind,
    SegmentKind,
    Verdict,
)
from gcckit.errors import PreconditionError
from gcckit.geometry.collar import CollarChart, build_collar_chart
from gcckit.geometry.domain import Domain
from gcckit.geometry.hamiltonian import PhasePoint
from gcckit.geometry.metric import MetricField
from gcckit.geometry.perturb import lipschitz_perturb
from gcckit.types import Callable, Report, Sequence
from gcckit.util.loader import chunk, process_batches, reduce_concat

# ------------------------------------------------------------------------------
# Default values
# ------------------------------------------------------------------------------

MAX_WITNESSES = 10
MAX_REFINED_FAILURES = 50
DEFAULT_BATCH_SIZE = 64
DEFAULT_T_RESOLUTION = 0.01
TIME_TOLERANCE = 1e-12

# ------------------------------------------------------------------------------
# Per-sample outcomes
# ------------------------------------------------------------------------------


@dataclass(frozen=True)
class BranchHit:
    """First time a branch reaches the region.

    Attributes:
        branch_id: Branch index.
        hit: First time in the region, ``inf`` if none was seen.
        reached: Time up to which the branch was traced.
        order3: Order-3 glancing contacts over the region (not counted as escape
            points unless the branch glides).
        diagnostic: Truncation reason, if any.
    """

    branch_id: int
    hit: float
    reached: float
    order3: int = 0
    diagnostic: str | None = None

    def passes(self, T: float) -> bool | None:
        """True/False when decided at ``T``, None when tracing stopped too early."""
        if self.hit < T:
            return True
        if self.reached >= T - TIME_TOLERANCE:
            return False
        return None


@dataclass(frozen=True)
class SampleOutcome:
    rho: PhasePoint
    branches: tuple[BranchHit, ...]
    trajectories: tuple[GeneralizedTrajectory, ...]

    def verdict(self, T: float, mode: GccMode) -> Verdict:
        results = [branch.passes(T) for branch in self.branches]
        if mode == GccMode.STRONG:
            if any(result is False for result in results):
                return Verdict.FAILS
            if any(result is None for result in results):
                return Verdict.INDETERMINATE
            return Verdict.HOLDS
        if any(result is True for result in results):
            return Verdict.HOLDS
        if any(result is None for result in results):
            return Verdict.INDETERMINATE
        return Verdict.FAILS


def _finite_or_none(value: float) -> float | None:
    return float(value) if np.isfinite(value) else None


@dataclass(frozen=True)
class Witness:
    """A failing sample together with the branches traced from it."""

    rho: PhasePoint
    mode: GccMode
    trajectories: tuple[GeneralizedTrajectory, ...]
    hit_times: tuple[float, ...]

    def to_dict(self) -> Report:
        return {
            "t": float(self.rho.t),
            "x": np.asarray(self.rho.x).tolist(),
            "tau": float(self.rho.tau),
            "xi": np.asarray(self.rho.xi).tolist(),
            "hit_times": [_finite_or_none(h) for h in self.hit_times],
            "branches": [trajectory.branch_id for trajectory in self.trajectories],
            "jumps": [len(trajectory.jumps) for trajectory in self.trajectories],
        }


@dataclass
class GccReport:
    """Outcome of a control check on a sampled phase space.

    Attributes:
        verdict: ``holds`` iff every sample passes, ``fails`` iff some sample is
            decided to fail, ``indeterminate`` otherwise.
        coverage: Fraction of samples that pass.
        T_used: Control time.
        mode: Strong or weak condition.
        region: Region description.
        region_kind: Interior or boundary.
        n_samples: Number of samples.
        n_pass: Passing samples.
        n_fail: Failing samples.
        n_indeterminate: Samples with a truncated, undecided branch.
        witnesses: First failing samples (at most `MAX_WITNESSES`).
        sampling: Sampling grid.
        policy: Branching policy.
        branch_count: Branches traced per sample.
        order3_contacts: Order-3 contacts seen over the region.
        truncated_branches: Branches that stopped early.
        failures: Every failing sample.
    """

    verdict: Verdict
    coverage: float
    T_used: float
    mode: GccMode
    region: str
    region_kind: RegionKind
    n_samples: int
    n_pass: int
    n_fail: int
    n_indeterminate: int
    witnesses: list[Witness]
    sampling: SamplingSpec
    policy: BranchPolicy
    branch_count: int
    order3_contacts: int = 0
    truncated_branches: int = 0
    failures: list[PhasePoint] = field(default_factory=list, repr=False)

    @property
    def indeterminate_fraction(self) -> float:
        return self.n_indeterminate / max(self.n_samples, 1)

    def to_dict(self) -> Report:
        return {
            "verdict": str(self.verdict),
            "coverage": self.coverage,
            "indeterminate_fraction": self.indeterminate_fraction,
            "T": self.T_used,
            "mode": str(self.mode),
            "region": self.region,
            "region_kind": str(self.region_kind),
            "samples": {
                "total": self.n_samples,
                "pass": self.n_pass,
                "fail": self.n_fail,
                "indeterminate": self.n_indeterminate,
            },
            "sampling": self.sampling.to_dict(),
            "policy": {
                "n_branches": self.policy.n_branches,
                "jitter": self.policy.jitter,
                "glancing_rule": str(self.policy.glancing_rule),
                "rng_seed": self.policy.rng_seed,
            },
            "branch_count": self.branch_count,
            "order3_contacts": self.order3_contacts,
            "truncated_branches": self.truncated_branches,
            "witnesses": [witness.to_dict() for witness in self.witnesses],
        }


# ------------------------------------------------------------------------------
# First hits
# ------------------------------------------------------------------------------


def first_interior_hit(
    trajectory: GeneralizedTrajectory,
    region: ObservationRegion,
    *,
    dilation: float = 0.0,
    resolution: float | None = None,
) -> float:
    """First time the trajectory enters ``{level > -dilation}``.

    Positions are interpolated linearly between samples at spacing
    ``resolution`` (``0.1 * width`` by default) so thin regions are not skipped,
    and the entry time is interpolated from the level values.
    """
    states = trajectory.states
    d = trajectory.dim
    times, positions = states[:, 0], states[:, 1 : 1 + d]
    resolution = resolution or 0.1 * region.width
    if len(times) > 1:
        lengths = np.linalg.norm(np.diff(positions, axis=0), axis=1)
        counts = np.maximum(np.ceil(lengths / resolution), 1).astype(int)
        index = np.repeat(np.arange(len(lengths)), counts)
        offsets = np.arange(index.size) - np.repeat(np.cumsum(counts) - counts, counts)
        frac = offsets / np.repeat(counts, counts)
        t = np.append(times[index] + frac * (times[index + 1] - times[index]), times[-1])
        x = np.vstack([
            positions[index] + frac[:, None] * (positions[index + 1] - positions[index]),
            positions[-1:],
        ])
    else:
        t, x = times, positions

    values = region.values(x) + dilation
    inside = np.flatnonzero(values > 0)
    if inside.size == 0:
        return np.inf
    k = int(inside[0])
    if k == 0:
        return float(t[0])
    v0, v1 = values[k - 1], values[k]
    return float(t[k - 1] + (t[k] - t[k - 1]) * (-v0) / (v1 - v0))


def first_boundary_hit(
    trajectory: GeneralizedTrajectory,
    region: ObservationRegion,
    domain: Domain,
    *,
    dilation: float = 0.0,
) -> tuple[float, int]:
    """First escape-point contact over the boundary region.

    Returns:
        ``(time, order3)``: the first time (``inf`` if none) and the number of
        order-3 contacts over the region.
    """
    best, order3 = np.inf, 0
    for event in trajectory.events:
        if region.values(event.sigma) + dilation <= 0:
            continue
        cls = event.boundary_class
        if cls is None:
            escape = event.action == "corner"
        else:
            future = is_escape_point(cls, EscapeDirection.FUTURE)
            past = is_escape_point(cls, EscapeDirection.PAST)
            if future is None or past is None:
                order3 += 1
                escape = event.action == "glide"
            else:
                escape = future or past
        if escape:
            best = min(best, event.t)

    for segment in trajectory.segments:
        if segment.kind != SegmentKind.GLIDING:
            continue
        sigmas = np.array([domain.wrap(domain.project(x)) for x in segment.positions])
        inside = np.flatnonzero(region.values(sigmas) + dilation > 0)
        if inside.size:
            best = min(best, float(segment.times[inside[0]]))
    return best, order3


# ------------------------------------------------------------------------------
# Sample evaluation
# ------------------------------------------------------------------------------


def _trace_sample(
    rho: PhasePoint,
    metric: MetricField,
    chart: CollarChart,
    region: ObservationRegion,
    T: float,
    policy: BranchPolicy,
    dilation: float,
    integrator_kwargs: dict,
) -> SampleOutcome:
    trajectories = advance_generalized(metric, chart, rho, T, policy, **integrator_kwargs)
    hits = []
    for trajectory in trajectories:
        if region.kind == RegionKind.INTERIOR:
            hit, order3 = first_interior_hit(trajectory, region, dilation=dilation), 0
        else:
            hit, order3 = first_boundary_hit(trajectory, region, chart.domain, dilation=dilation)
        reached = trajectory.t_reached if trajectory.truncated else trajectory.t_end
        hits.append(
            BranchHit(trajectory.branch_id, hit, reached, order3, trajectory.diagnostic)
        )
    return SampleOutcome(rho, tuple(hits), tuple(trajectories))


def _evaluate(
    metric: MetricField,
    chart: CollarChart,
    region: ObservationRegion,
    samples: Sequence[PhasePoint],
    T: float,
    policy: BranchPolicy,
    dilation: float,
    *,
    jobs: int | None = None,
    **kwargs,
) -> list[SampleOutcome]:
    batch_size = kwargs.pop("gcc_batch_size", DEFAULT_BATCH_SIZE)
    trace = partial(
        _trace_sample,
        metric=metric,
        chart=chart,
        region=region,
        T=T,
        policy=policy,
        dilation=dilation,
        integrator_kwargs=kwargs,
    )
    return process_batches(
        lambda batch: [trace(rho) for rho in batch],
        chunk(list(samples), batch_size),
        reduce_concat,
        jobs=jobs,
    )


def summarize(
    outcomes: Sequence[SampleOutcome],
    T: float,
    mode: GccMode,
    region: ObservationRegion,
    sampling: SamplingSpec,
    policy: BranchPolicy,
) -> GccReport:
    """Reduce per-sample outcomes to a report at control time ``T``."""
    verdicts = [outcome.verdict(T, mode) for outcome in outcomes]
    n_pass = sum(v == Verdict.HOLDS for v in verdicts)
    n_fail = sum(v == Verdict.FAILS for v in verdicts)
    n_undecided = len(verdicts) - n_pass - n_fail
    if n_fail:
        verdict = Verdict.FAILS
    elif n_undecided:
        verdict = Verdict.INDETERMINATE
    else:
        verdict = Verdict.HOLDS

    failing = [o for o, v in zip(outcomes, verdicts, strict=True) if v == Verdict.FAILS]
    witnesses = [
        Witness(
            o.rho,
            mode,
            o.trajectories,
            tuple(branch.hit for branch in o.branches),
        )
        for o in failing[:MAX_WITNESSES]
    ]
    return GccReport(
        verdict=verdict,
        coverage=n_pass / max(len(outcomes), 1),
        T_used=T,
        mode=mode,
        region=region.name,
        region_kind=region.kind,
        n_samples=len(outcomes),
        n_pass=n_pass,
        n_fail=n_fail,
        n_indeterminate=n_undecided,
        witnesses=witnesses,
        sampling=sampling,
        policy=policy,
        branch_count=policy.n_branches,
        order3_contacts=sum(b.order3 for o in outcomes for b in o.branches),
        truncated_branches=sum(
            b.diagnostic is not None and b.reached < T for o in outcomes for b in o.branches
        ),
        failures=[o.rho for o in failing],
    )


def _refined_samples(
    metric: MetricField,
    domain: Domain,
    failures: Sequence[PhasePoint],
    sampling: SamplingSpec,
) -> list[PhasePoint]:
    samples = []
    for rho in failures[:MAX_REFINED_FAILURES]:
        samples.extend(local_samples(metric, domain, rho, sampling))
    logger.debug(f"Refining around {len(failures)} failure(s): {len(samples)} samples")
    return samples


def _run_check(
    metric: MetricField,
    domain: Domain,
    region: ObservationRegion,
    T: float,
    sampling: SamplingSpec | None,
    policy: BranchPolicy | None,
    *,
    mode: GccMode,
    chart: CollarChart | None = None,
    refine: bool = False,
    jobs: int | None = None,
    **kwargs,
) -> tuple[GccReport, list[SampleOutcome]]:
    if T <= 0:
        msg = f"control time must be positive, got {T}"
        raise PreconditionError(msg)
    sampling = sampling or SamplingSpec()
    policy = policy or BranchPolicy()
    chart = chart if chart is not None else build_collar_chart(domain, metric)
    dilation = region.dilation if mode == GccMode.WEAK else 0.0

    samples = phase_space_samples(metric, domain, sampling)
    logger.debug(
        f"Checking {mode} control from {region.name} at T={T}: "
        f"{len(samples)} samples, {policy.n_branches} branch(es)"
    )
    outcomes = _evaluate(metric, chart, region, samples, T, policy, dilation, jobs=jobs, **kwargs)
    report = summarize(outcomes, T, mode, region, sampling, policy)

    if refine and report.failures:
        extra = _refined_samples(metric, domain, report.failures, sampling)
        refined = _evaluate(metric, chart, region, extra, T, policy, dilation, jobs=jobs, **kwargs)
        refined_witnesses = summarize(refined, T, mode, region, sampling, policy).witnesses
        outcomes += refined
        report = summarize(outcomes, T, mode, region, sampling, policy)
        report.witnesses = refined_witnesses or report.witnesses

    logger.info(
        f"{mode} control from {region.name} at T={T}: {report.verdict} "
        f"(coverage {report.coverage:.3f}, {report.n_fail} failing, "
        f"{report.n_indeterminate} undecided)"
    )
    return report, outcomes


# ------------------------------------------------------------------------------
# Public checkers
# ------------------------------------------------------------------------------


def check_interior_gcc(
    metric: MetricField,
    domain: Domain,
    region: ObservationRegion,
    T: float,
    sampling: SamplingSpec | None = None,
    policy: BranchPolicy | None = None,
    **kwargs,
) -> GccReport:
    """Strong interior control: every branch of every sample enters ``omega`` in ``(0, T)``.

    Args:
        metric: The metric.
        domain: The domain.
        region: Interior observation region.
        T: Control time.
        sampling: Sampling grid.
        policy: Branching policy.
        **kwargs: ``chart``, ``refine``, ``jobs``, ``gcc_batch_size`` and
            options forwarded to `advance_generalized`.

    Raises:
        PreconditionError: If the region is not interior or ``T <= 0``.
    """
    if region.kind != RegionKind.INTERIOR:
        msg = f"interior control needs an interior region, got {region.kind}"
        raise PreconditionError(msg)
    report, _ = _run_check(metric, domain, region, T, sampling, policy, mode=GccMode.STRONG, **kwargs)
    return report


def check_boundary_gcc(
    metric: MetricField,
    domain: Domain,
    region: ObservationRegion,
    T: float,
    sampling: SamplingSpec | None = None,
    policy: BranchPolicy | None = None,
    **kwargs,
) -> GccReport:
    """Strong boundary control: every branch meets an escape point over ``Gamma`` in ``(0, T)``.

    Diffractive contacts never count. Order-3 contacts count only when the
    branch glides from them; they are tallied in ``order3_contacts``.
    """
    if region.kind != RegionKind.BOUNDARY:
        msg = f"boundary control needs a boundary region, got {region.kind}"
        raise PreconditionError(msg)
    report, _ = _run_check(metric, domain, region, T, sampling, policy, mode=GccMode.STRONG, **kwargs)
    return report


def check_weak_gcc(
    metric: MetricField,
    domain: Domain,
    region: ObservationRegion,
    T: float,
    sampling: SamplingSpec | None = None,
    policy: BranchPolicy | None = None,
    **kwargs,
) -> GccReport:
    """Weak control: some branch reaches the ``dilation``-neighbourhood of the region.

    Raises:
        PreconditionError: If ``region.dilation`` is not positive.
    """
    if region.dilation <= 0:
        msg = "weak control needs a region with positive dilation"
        raise PreconditionError(msg)
    report, _ = _run_check(metric, domain, region, T, sampling, policy, mode=GccMode.WEAK, **kwargs)
    return report


def check_gcc(
    metric: MetricField,
    domain: Domain,
    region: ObservationRegion,
    T: float,
    sampling: SamplingSpec | None = None,
    policy: BranchPolicy | None = None,
    *,
    mode: GccMode | str = GccMode.STRONG,
    **kwargs,
) -> GccReport:
    """Dispatch to the checker matching the region kind and mode."""
    if GccMode(mode) == GccMode.WEAK:
        return check_weak_gcc(metric, domain, region, T, sampling, policy, **kwargs)
    if region.kind == RegionKind.BOUNDARY:
        return check_boundary_gcc(metric, domain, region, T, sampling, policy, **kwargs)
    return check_interior_gcc(metric, domain, region, T, sampling, policy, **kwargs)


def refine_failures(
    metric: MetricField,
    domain: Domain,
    region: ObservationRegion,
    report: GccReport,
    *,
    chart: CollarChart | None = None,
    jobs: int | None = None,
    **kwargs,
) -> GccReport:
    """Re-check the neighbourhoods of the failing samples of a report.

    Samples are drawn with `local_samples` at ``spacing / refine_factor``
    around every failure (up to `MAX_REFINED_FAILURES`); the returned report
    covers the refined samples only, so its witnesses come from the finer set.
    """
    chart = chart if chart is not None else build_collar_chart(domain, metric)
    dilation = region.dilation if report.mode == GccMode.WEAK else 0.0
    samples = _refined_samples(metric, domain, report.failures, report.sampling)
    if not samples:
        return report
    outcomes = _evaluate(
        metric, chart, region, samples, report.T_used, report.policy, dilation, jobs=jobs, **kwargs
    )
    return summarize(outcomes, report.T_used, report.mode, region, report.sampling.refined(), report.policy)


# ------------------------------------------------------------------------------
# Witness verification
# ------------------------------------------------------------------------------


def verify_witness(
    metric: MetricField,
    domain: Domain,
    region: ObservationRegion,
    witness: Witness,
    T: float,
    policy: BranchPolicy | None = None,
    *,
    tol: float = 1e-6,
    rtol: float = 1e-11,
    atol: float = 1e-13,
) -> bool:
    """Re-trace a witness on a fresh chart with tighter tolerances.

    Returns:
        Whether the re-simulated witness still avoids the region over
        ``(0, T - tol)``: some branch for the strong condition, every branch
        for the weak one.
    """
    chart = build_collar_chart(domain, metric)
    dilation = region.dilation if witness.mode == GccMode.WEAK else 0.0
    outcome = _trace_sample(
        witness.rho,
        metric,
        chart,
        region,
        T,
        policy or BranchPolicy(n_branches=len(witness.trajectories)),
        dilation,
        {"rtol": rtol, "atol": atol},
    )
    avoided = [branch.hit >= T - tol for branch in outcome.branches]
    return any(avoided) if witness.mode == GccMode.STRONG else all(avoided)


# ------------------------------------------------------------------------------
# Control time estimation
# ------------------------------------------------------------------------------


@dataclass(frozen=True)
class TgccEstimate:
    """Estimate of the smallest control time.

    Attributes:
        value: Upper end of the final bracket, ``inf`` if control fails at ``T_max``.
        lower: Lower end of the final bracket.
        upper: Upper end of the final bracket.
        trace: Every probed ``(T, verdict)`` in order.
        monotone: Whether the probed verdicts were monotone in ``T``.
    """

    value: float
    lower: float
    upper: float
    trace: tuple[tuple[float, Verdict], ...]
    monotone: bool = True

    def to_dict(self) -> Report:
        return {
            "T_gcc": _finite_or_none(self.value),
            "lower": self.lower,
            "upper": _finite_or_none(self.upper),
            "monotone": self.monotone,
            "trace": [[T, str(v)] for T, v in self.trace],
        }


def _monotonicity_gap(trace: Sequence[tuple[float, Verdict]]) -> tuple[float, float] | None:
    """Bracket covering every probe where a smaller T held but a larger one did not."""
    held = [T for T, v in trace if v == Verdict.HOLDS]
    missed = [T for T, v in trace if v != Verdict.HOLDS]
    bad_held = [T for T in held if any(m > T for m in missed)]
    if not bad_held:
        return None
    return min(bad_held), max(m for m in missed if m > min(bad_held))


def estimate_T_gcc(
    metric: MetricField,
    domain: Domain,
    region: ObservationRegion,
    T_max: float,
    sampling: SamplingSpec | None = None,
    policy: BranchPolicy | None = None,
    *,
    mode: GccMode | str = GccMode.STRONG,
    resolution: float = DEFAULT_T_RESOLUTION,
    recompute: bool = False,
    **kwargs,
) -> TgccEstimate:
    """Bisect the control predicate over ``(0, T_max]``.

    By default every sample is traced once up to ``T_max`` and the predicate is
    evaluated from the recorded first-hit times, which makes it monotone. With
    ``recompute`` every probe re-runs the checker; non-monotone probes then widen
    the bracket and emit a warning.

    Raises:
        PreconditionError: If ``T_max`` is not positive and finite.
    """
    if not (np.isfinite(T_max) and T_max > 0):
        msg = f"T_max must be positive and finite, got {T_max}"
        raise PreconditionError(msg)
    mode = GccMode(mode)
    sampling = sampling or SamplingSpec()
    policy = policy or BranchPolicy()
    if kwargs.get("chart") is None:
        kwargs["chart"] = build_collar_chart(domain, metric)

    report, outcomes = _run_check(
        metric, domain, region, T_max, sampling, policy, mode=mode, **kwargs
    )

    def verdict_at(T: float) -> Verdict:
        if recompute:
            return _run_check(metric, domain, region, T, sampling, policy, mode=mode, **kwargs)[0].verdict
        return summarize(outcomes, T, mode, region, sampling, policy).verdict

    trace = [(T_max, report.verdict)]
    if report.verdict != Verdict.HOLDS:
        if report.verdict == Verdict.INDETERMINATE:
            warnings.warn(
                f"control at T_max={T_max} is indeterminate; reporting T_gcc = inf",
                stacklevel=2,
            )
        return TgccEstimate(np.inf, T_max, np.inf, tuple(trace))

    lo, hi = 0.0, T_max
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        verdict = verdict_at(mid)
        trace.append((mid, verdict))
        if verdict == Verdict.HOLDS:
            hi = mid
        else:
            lo = mid

    gap = _monotonicity_gap(trace)
    if gap is not None:
        lo, hi = min(lo, gap[0]), max(hi, gap[1])
        warnings.warn(
            f"non-monotone control verdicts; widened T_gcc bracket to [{lo:.4g}, {hi:.4g}]",
            stacklevel=2,
        )
    logger.info(f"T_gcc({region.name}) in [{lo:.4g}, {hi:.4g}] after {len(trace)} probes")
    return TgccEstimate(hi, lo, hi, tuple(trace), monotone=gap is None)


# ------------------------------------------------------------------------------
# Stability under perturbations
# ------------------------------------------------------------------------------


def perturbation_sweep(
    metric: MetricField,
    domain: Domain,
    region: ObservationRegion,
    T: float,
    eps_list: Sequence[float],
    trials: int,
    sampling: SamplingSpec | None = None,
    policy: BranchPolicy | None = None,
    *,
    mode: GccMode | str = GccMode.STRONG,
    perturbation: PerturbationMode | str = PerturbationMode.CONFORMAL,
    perturb: Callable[..., MetricField] | None = None,
    seed: int = 0,
    **kwargs,
) -> list[Report]:
    """Re-run the checker at the same ``T`` on random Lipschitz perturbations.

    Args:
        metric: Base metric; control must hold for it at ``T``.
        domain: The domain.
        region: Observation region.
        T: Control time.
        eps_list: Perturbation sizes.
        trials: Perturbations drawn per size (seeds ``seed .. seed + trials - 1``).
        sampling: Sampling grid.
        policy: Branching policy.
        mode: Strong or weak condition.
        perturbation: Perturbation family passed to the perturbation function.
        perturb: Replacement for `lipschitz_perturb` with the same signature.
        seed: First seed.
        **kwargs: Forwarded to the checker.

    Returns:
        One row ``{eps, trials, passes, pass_rate}`` per size.

    Raises:
        PreconditionError: If control fails for the base metric.
    """
    perturb = perturb or lipschitz_perturb
    kwargs.pop("chart", None)
    check = partial(check_gcc, region=region, T=T, sampling=sampling, policy=policy, mode=mode, **kwargs)
    base = check(metric, domain)
    if base.verdict != Verdict.HOLDS:
        msg = f"base configuration does not satisfy control at T={T} ({base.verdict})"
        raise PreconditionError(msg)

    rows = []
    for eps in eps_list:
        passes = 0
        for trial in range(trials):
            if eps == 0:
                verdict = base.verdict
            else:
                perturbed = perturb(
                    metric, eps, seed + trial, box=domain.bounding_box, mode=perturbation
                )
                verdict = check(perturbed, domain).verdict
            passes += verdict == Verdict.HOLDS
        rows.append({"eps": float(eps), "trials": trials, "passes": passes, "pass_rate": passes / trials})
        logger.info(f"eps={eps}: {passes}/{trials} perturbations keep control at T={T}")
    return rows
