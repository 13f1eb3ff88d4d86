"""Maximal generalized bicharacteristics with reflection, gliding and branching.

A trajectory alternates interior flow and boundary events:

- hyperbolic incoming hits are reflected by ``zeta -> -zeta`` and logged as jumps,
- diffractive glancing points continue with the interior flow,
- gliding glancing points follow the gliding field on ``{z = zeta = 0}`` until
  ``H_p^2 z`` rises above ``eps_d``,
- order-3 glancing points follow the policy's glancing rule.

Continuations are not unique in general. A `BranchPolicy` asks for a finite
number of branches; branch ``b > 0`` is re-seeded with a relative covector
jitter at the start and after every boundary event, and under
``both-continuations`` the ``k``-th order-3 point of branch ``b`` glides iff
bit ``k`` of ``b`` is zero.
"""

import functools
from dataclasses import dataclass, field

import jax
import jax.numpy as jnp
import numpy as np
from loguru import logger

from gcckit.dynamics.boundary import (
    BoundaryClass,
    _normal_kernels,
    classify,
    gliding_vector,
    reflect,
    second_normal_derivative,
)
from gcckit.dynamics.flow import (
    TrajectorySegment,
    integrate_interior,
)
from gcckit.enums import BoundaryTag, GlancingRule, SegmentKind
from gcckit.errors import ConfigurationError, IntegrationError, PreconditionError
from gcckit.geometry.collar import CollarChart
from gcckit.geometry.hamiltonian import (
    PhasePoint,
    project_to_shell,
    split_state,
    wave_symbol,
)
from gcckit.geometry.metric import MetricField
from gcckit.types import NDArray
from gcckit.util.ops import parallel_map

# ------------------------------------------------------------------------------
# Default values
# ------------------------------------------------------------------------------

DEFAULT_MAX_EVENTS = 10_000
DEFAULT_MAX_EVENT_RATE = 1_000.0
DEFAULT_GLIDE_STEP = 2e-3
CORNER_TOLERANCE = 1e-8
CORNER_SIDE_OFFSET = 1e-6
ON_BOUNDARY_TOLERANCE = 1e-9


@dataclass(frozen=True)
class BranchPolicy:
    """How many continuations to follow and how to pick them.

    Attributes:
        n_branches: Number of branches (at least 1).
        jitter: Relative covector perturbation of branches ``b > 0``.
        glancing_rule: Continuation at order-3 glancing points.
        rng_seed: Seed of the jitter.
    """

    n_branches: int = 1
    jitter: float = 0.0
    glancing_rule: GlancingRule = GlancingRule.BOTH
    rng_seed: int = 0

    def __post_init__(self):
        if self.n_branches < 1:
            msg = f"n_branches must be at least 1, got {self.n_branches}"
            raise ConfigurationError(msg)
        if self.jitter < 0:
            msg = f"jitter must be non-negative, got {self.jitter}"
            raise ConfigurationError(msg)
        object.__setattr__(self, "glancing_rule", GlancingRule(self.glancing_rule))


@dataclass(frozen=True)
class Jump:
    """A reflection: ``after = Sigma(before)`` at time ``t``."""

    t: float
    sigma: float
    before: PhasePoint
    after: PhasePoint


@dataclass(frozen=True)
class BoundaryEvent:
    """One boundary contact and what the tracer did with it."""

    t: float
    sigma: float
    point: PhasePoint
    boundary_class: BoundaryClass | None
    action: str


@dataclass
class GeneralizedTrajectory:
    """One branch of a generalized bicharacteristic, ordered by increasing time.

    Attributes:
        branch_id: Index of the branch (0 is never jittered).
        segments: Interior and gliding pieces in time order.
        jumps: Reflections.
        events: Every boundary contact with its classification.
        t_start: Start time.
        t_end: Requested end time.
        truncated: Whether tracing stopped before ``t_end``.
        diagnostic: Why it stopped, or notes on ambiguous continuations.
    """

    branch_id: int
    segments: list[TrajectorySegment] = field(default_factory=list)
    jumps: list[Jump] = field(default_factory=list)
    events: list[BoundaryEvent] = field(default_factory=list)
    t_start: float = 0.0
    t_end: float = 0.0
    truncated: bool = False
    diagnostic: str | None = None

    @property
    def states(self) -> NDArray:
        """All samples stacked in time order."""
        if not self.segments:
            return np.zeros((0, 0))
        states = np.concatenate([segment.states for segment in self.segments], axis=0)
        order = np.argsort(states[:, 0], kind="stable")
        return states[order]

    @property
    def dim(self) -> int:
        return self.segments[0].dim

    @property
    def times(self) -> NDArray:
        return self.states[:, 0]

    @property
    def positions(self) -> NDArray:
        return self.states[:, 1 : 1 + self.dim]

    @property
    def t_reached(self) -> float:
        return float(self.states[-1, 0]) if self.segments else self.t_start

    @property
    def end(self) -> PhasePoint:
        return PhasePoint.from_state(self.states[-1])

    def position_at(self, t: float) -> NDArray:
        """Piecewise-linear position at time ``t``."""
        states = self.states
        return np.array([
            np.interp(t, states[:, 0], states[:, 1 + i]) for i in range(self.dim)
        ])

    def to_rows(self) -> list[tuple]:
        """Rows ``(branch_id, s, t, x..., tau, xi..., event_tag)`` in time order."""
        states = self.states
        tau = float(states[0, 1 + self.dim])
        entries = [(float(y[0]), 0, y, "") for y in states]
        for event in self.events:
            tag = event.action
            if event.boundary_class is not None:
                tag = f"{event.boundary_class.tag}:{event.action}"
            entries.append((event.t, 1, np.asarray(event.point.to_state()), tag))
        entries.sort(key=lambda entry: entry[:2])
        return [
            (self.branch_id, (self.t_start - t) / (2.0 * tau), *(float(v) for v in y), tag)
            for t, _, y, tag in entries
        ]


# ------------------------------------------------------------------------------
# Gliding kernel
# ------------------------------------------------------------------------------


@functools.lru_cache(maxsize=32)
def _glide_kernel(chart: CollarChart):
    """Jitted RK4 step of the gliding field in physical time, normal frozen per step."""
    metric = chart.metric
    hp2_phi, grad_phi = _normal_kernels(chart)
    step_fd = chart.tolerances.hp2z_step

    def field(y, nu):
        _, x, tau, _ = split_state(y)
        g_inv = metric.g_inv(x)
        norm = jnp.sqrt(nu @ g_inv @ nu)
        n_g, dz = g_inv @ nu / norm, nu / norm
        hp2z = hp2_phi(y, step_fd) / (grad_phi(x) @ n_g)
        return gliding_vector(chart, y, dz, hp2z) / (-2.0 * tau)

    def rk4(y, nu, h):
        k1 = field(y, nu)
        k2 = field(y + 0.5 * h * k1, nu)
        k3 = field(y + 0.5 * h * k2, nu)
        k4 = field(y + h * k3, nu)
        return y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)

    return jax.jit(rk4)


# ------------------------------------------------------------------------------
# Tracer
# ------------------------------------------------------------------------------


@dataclass
class _BranchState:
    rho: PhasePoint
    on_boundary: bool
    order3_seen: int = 0


class _GeneralizedTracer:
    def __init__(
        self,
        chart: CollarChart,
        policy: BranchPolicy,
        *,
        max_events: int,
        max_event_rate: float,
        glide_step: float,
        integrator_kwargs: dict,
    ):
        self.chart = chart
        self.metric = chart.metric
        self.domain = chart.domain
        self.tolerances = chart.tolerances
        self.policy = policy
        self.max_events = max_events
        self.max_event_rate = max_event_rate
        self.glide_step = glide_step
        self.integrator_kwargs = integrator_kwargs

    # --- helpers ---------------------------------------------------------------

    def jitter(self, rho: PhasePoint, branch_id: int, index: int) -> PhasePoint:
        if branch_id == 0 or self.policy.jitter == 0:
            return rho
        key = jax.random.fold_in(
            jax.random.fold_in(jax.random.PRNGKey(self.policy.rng_seed), branch_id), index
        )
        xi = np.asarray(rho.xi, dtype=float)
        noise = np.asarray(jax.random.normal(key, xi.shape))
        xi = xi + self.policy.jitter * np.linalg.norm(xi) * noise
        return project_to_shell(self.metric, rho.replace(xi=xi))

    def snap(self, rho: PhasePoint, sigma: float) -> PhasePoint:
        point = np.asarray(self.domain.boundary_point(jnp.asarray(float(sigma))))
        return rho.replace(x=point)

    def corner_reflection(
        self, rho: PhasePoint, corner: float, trajectory: GeneralizedTrajectory
    ) -> PhasePoint:
        """Reflect across every adjacent edge the ray is entering."""
        rho = self.snap(rho, corner)
        for side in (corner - CORNER_SIDE_OFFSET, corner + CORNER_SIDE_OFFSET):
            frame = self.chart.frame(self.domain.wrap(side))
            xi = np.asarray(rho.xi, dtype=float)
            zeta = frame.zeta(xi)
            if zeta / rho.tau > 0:
                after = rho.replace(xi=xi - 2.0 * zeta * frame.dz)
                trajectory.jumps.append(Jump(t=rho.t, sigma=corner, before=rho, after=after))
                rho = after
        trajectory.events.append(
            BoundaryEvent(t=rho.t, sigma=corner, point=rho, boundary_class=None, action="corner")
        )
        return rho

    def glancing_action(self, cls: BoundaryClass, state: _BranchState, branch_id: int) -> str:
        if cls.tag == BoundaryTag.GLANCING_DIFFRACTIVE:
            return "diffract"
        if cls.tag == BoundaryTag.GLANCING_GLIDING:
            return "glide"
        rule = self.policy.glancing_rule
        if rule == GlancingRule.GLIDING_FIRST:
            return "glide"
        if rule == GlancingRule.INTERIOR_FIRST:
            return "diffract"
        bit = (branch_id >> state.order3_seen) & 1
        state.order3_seen += 1
        return "diffract" if bit else "glide"

    # --- pieces ----------------------------------------------------------------

    def glide(
        self, rho: PhasePoint, t_end: float
    ) -> tuple[TrajectorySegment, PhasePoint, str]:
        """Follow the gliding field until release, a corner, or ``t_end``."""
        step = _glide_kernel(self.chart)
        metric, domain = self.metric, self.domain
        d = rho.dim
        t0, tau = rho.t, rho.tau
        states = [np.asarray(rho.to_state())]
        y = states[0]
        sigma = domain.project(rho.x)
        outcome = "end"
        while y[0] < t_end - 1e-13:
            h = min(self.glide_step, t_end - y[0])
            nu = np.asarray(domain.inward_normal(jnp.asarray(float(sigma))))
            y = np.asarray(step(jnp.asarray(y), jnp.asarray(nu), h))

            sigma = domain.project(y[1 : 1 + d])
            frame = self.chart.frame(sigma)
            xi = y[2 + d :]
            xi = xi - frame.zeta(xi) * frame.dz
            g_inv = np.asarray(metric.g_inv(jnp.asarray(frame.point)))
            xi = xi * abs(tau) / np.sqrt(xi @ g_inv @ xi)
            y = np.concatenate([[y[0]], frame.point, [tau], xi])
            states.append(y)

            current = PhasePoint.from_state(y)
            if domain.near_corner(sigma, CORNER_TOLERANCE) is not None:
                outcome = "corner"
                break
            if second_normal_derivative(self.chart, current, frame) > self.tolerances.eps_d:
                outcome = "release"
                break

        states = np.stack(states)
        positions, covectors = states[:, 1 : 1 + d], states[:, 2 + d :]
        g_inv = np.asarray(jax.vmap(metric.g_inv)(jnp.asarray(positions)))
        symbol = np.einsum("ni,nij,nj->n", covectors, g_inv, covectors) - tau**2
        drift = float(np.max(np.abs(symbol))) / tau**2
        segment = TrajectorySegment(
            states=states,
            s=(t0 - states[:, 0]) / (2.0 * tau),
            kind=SegmentKind.GLIDING,
            p_drift=drift,
        )
        return segment, PhasePoint.from_state(states[-1]), outcome

    # --- main loop -------------------------------------------------------------

    def trace(self, rho0: PhasePoint, t_end: float, branch_id: int) -> GeneralizedTrajectory:
        trajectory = GeneralizedTrajectory(branch_id=branch_id, t_start=rho0.t, t_end=t_end)
        rho = self.jitter(rho0, branch_id, 0)
        on_boundary = abs(float(self.domain.phi(jnp.asarray(rho.x)))) <= ON_BOUNDARY_TOLERANCE
        state = _BranchState(rho=rho, on_boundary=on_boundary)
        notes = []

        while state.rho.t < t_end - 1e-12:
            n_events = len(trajectory.events)
            elapsed = state.rho.t - rho0.t
            if n_events >= self.max_events or n_events > self.max_event_rate * elapsed + 16:
                trajectory.truncated = True
                notes.append(f"event cap reached after {n_events} events at t={state.rho.t:.6g}")
                break

            rho = state.rho
            action = "interior"
            if state.on_boundary:
                sigma = self.domain.project(rho.x)
                corner = self.domain.near_corner(sigma, CORNER_TOLERANCE)
                if corner is not None:
                    rho = self.corner_reflection(rho, corner, trajectory)
                    rho = self.jitter(rho, branch_id, len(trajectory.events))
                else:
                    rho = self.snap(rho, sigma)
                    cls = classify(self.chart, rho)
                    if cls.is_hyperbolic:
                        action = "reflect" if cls.zeta / rho.tau > 0 else "leave"
                    elif cls.tag == BoundaryTag.ELLIPTIC:
                        action = "diffract"
                        notes.append(f"elliptic contact at t={rho.t:.6g} treated as interior")
                    else:
                        action = self.glancing_action(cls, state, branch_id)
                    trajectory.events.append(
                        BoundaryEvent(t=rho.t, sigma=sigma, point=rho, boundary_class=cls, action=action)
                    )
                    if action == "reflect":
                        after = reflect(self.chart, rho)
                        trajectory.jumps.append(Jump(t=rho.t, sigma=sigma, before=rho, after=after))
                        rho = self.jitter(after, branch_id, len(trajectory.events))

                if action == "glide":
                    segment, rho, outcome = self.glide(rho, t_end)
                    trajectory.segments.append(segment)
                    if outcome == "release":
                        trajectory.events.append(
                            BoundaryEvent(
                                t=rho.t,
                                sigma=self.domain.project(rho.x),
                                point=rho,
                                boundary_class=None,
                                action="release",
                            )
                        )
                    state = _BranchState(rho, outcome == "corner", state.order3_seen)
                    continue

            try:
                segment = integrate_interior(
                    self.metric,
                    rho,
                    t_end,
                    domain=self.domain,
                    tolerances=self.tolerances,
                    **self.integrator_kwargs,
                )
            except IntegrationError as err:
                if err.partial is not None:
                    trajectory.segments.append(err.partial)
                trajectory.truncated = True
                notes.append(str(err))
                break
            trajectory.segments.append(segment)
            if segment.event is None:
                break
            state = _BranchState(segment.event, True, state.order3_seen)

        if notes:
            trajectory.diagnostic = "; ".join(notes)
        if trajectory.truncated:
            logger.warning(f"branch {branch_id} truncated: {trajectory.diagnostic}")
        return trajectory


# ------------------------------------------------------------------------------
# Public operation
# ------------------------------------------------------------------------------


def advance_generalized(
    metric: MetricField,
    chart: CollarChart,
    rho0: PhasePoint,
    t_span: float | tuple[float, float],
    policy: BranchPolicy | None = None,
    *,
    max_events: int = DEFAULT_MAX_EVENTS,
    max_event_rate: float = DEFAULT_MAX_EVENT_RATE,
    glide_step: float = DEFAULT_GLIDE_STEP,
    jobs: int | None = None,
    **kwargs,
) -> list[GeneralizedTrajectory]:
    """Trace the branches of the generalized bicharacteristic through ``rho0``.

    Args:
        metric: The metric field; must be the one the chart was built with.
        chart: Collar chart of the domain.
        rho0: Characteristic starting point in the closure of the domain.
        t_span: End time, or ``(t_start, t_end)``; time runs forward.
        policy: Branching policy (one unjittered branch by default).
        max_events: Truncate after this many boundary events.
        max_event_rate: Truncate when events per unit time exceed this.
        glide_step: Fixed time step along gliding arcs.
        jobs: Worker count for tracing branches in parallel.
        **kwargs: Integrator options forwarded to `integrate_interior`.

    Returns:
        One trajectory per branch, sorted by ``branch_id``.

    Raises:
        PreconditionError: If ``rho0`` is off the shell or outside the domain.
    """
    policy = policy or BranchPolicy()
    if metric is not chart.metric:
        msg = "the collar chart was built for a different metric"
        raise PreconditionError(msg)
    if isinstance(t_span, tuple):
        rho0 = rho0.replace(t=float(t_span[0]))
        t_end = float(t_span[1])
    else:
        t_end = float(t_span)
    if t_end <= rho0.t:
        msg = f"t_span must run forward, got {rho0.t} -> {t_end}"
        raise PreconditionError(msg)
    if not chart.domain.contains(rho0.x, tol=ON_BOUNDARY_TOLERANCE):
        msg = f"starting point {np.asarray(rho0.x).tolist()} is outside the domain"
        raise PreconditionError(msg)
    p_value = wave_symbol(metric, rho0)
    if abs(p_value) > chart.tolerances.tol_p * max(rho0.tau**2, 1.0):
        msg = f"starting point is not characteristic: p={p_value:.3e}"
        raise PreconditionError(msg)

    tracer = _GeneralizedTracer(
        chart,
        policy,
        max_events=max_events,
        max_event_rate=max_event_rate,
        glide_step=glide_step,
        integrator_kwargs=kwargs,
    )
    trajectories = parallel_map(
        lambda b: tracer.trace(rho0, t_end, b), range(policy.n_branches), jobs=jobs
    )
    return sorted(trajectories, key=lambda trajectory: trajectory.branch_id)

