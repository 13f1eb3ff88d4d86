import jax
import jax.numpy as jnp
import numpy as np
import pytest

from gcckit.dynamics import flow_interior
from gcckit.dynamics.flow import physical_time_field
from gcckit.errors import ConfigurationError, PreconditionError
from gcckit.geometry import (
    PhasePoint,
    conformal_metric,
    create_metric,
    create_unit_square,
    flat_metric,
    phase_point_from_direction,
)
from gcckit.geometry.hamiltonian import wave_symbol

from .cases.billiards import speed_radial


def reference_rk4(metric, rho, t_end, dt):
    """Fixed-step RK4 of the physical-time field."""

    def field(y):
        return physical_time_field(metric, y)

    n = round((t_end - rho.t) / dt)

    def body(_, y):
        k1 = field(y)
        k2 = field(y + 0.5 * dt * k1)
        k3 = field(y + 0.5 * dt * k2)
        k4 = field(y + dt * k3)
        return y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)

    return np.asarray(jax.jit(lambda y: jax.lax.fori_loop(0, n, body, y))(rho.to_state()))


def test_flat_rays_are_lines():
    metric, domain = flat_metric(2), create_unit_square()
    rho = phase_point_from_direction(metric, [0.5, 0.5], [1.0, 0.0], tau=-1.0)
    segment = flow_interior(metric, rho, 0.2, domain=domain)
    assert segment.event is None
    assert segment.times[-1] == pytest.approx(0.4)
    expected = np.array([0.5, 0.5]) + segment.times[:, None] * np.array([1.0, 0.0])
    np.testing.assert_allclose(segment.positions, expected, atol=1e-12)


def test_boundary_event_is_located():
    metric, domain = flat_metric(2), create_unit_square()
    rho = phase_point_from_direction(metric, [0.5, 0.5], [1.0, 0.0], tau=-1.0)
    segment = flow_interior(metric, rho, 1.0, domain=domain)
    assert segment.event is not None
    assert segment.event.t == pytest.approx(0.5, abs=1e-10)
    np.testing.assert_allclose(segment.event.x, [1.0, 0.5], atol=1e-10)


def test_time_runs_backwards_in_the_parameter_for_positive_tau():
    metric = flat_metric(2)
    rho = phase_point_from_direction(metric, [0.5, 0.5], [0.0, 1.0], tau=1.0, t=0.3)
    segment = flow_interior(metric, rho, 0.1, domain=create_unit_square())
    np.testing.assert_allclose(segment.times, 0.3 - 2.0 * segment.s, atol=1e-14)
    assert segment.times[-1] == pytest.approx(0.1)
    assert np.all(np.diff(segment.times) < 0)


@pytest.mark.parametrize("seed", [pytest.param(seed, id=f"seed{seed}") for seed in range(3)])
def test_conformal_rays_match_reference_integrator(seed):
    metric = conformal_metric(speed_radial, 2)
    direction = jax.random.normal(jax.random.PRNGKey(seed), (2,))
    rho = phase_point_from_direction(metric, [0.2, 0.1], direction, tau=-1.0)
    segment = flow_interior(metric, rho, 0.5)
    reference = reference_rk4(metric, rho, 1.0, 1e-4)
    assert segment.times[-1] == pytest.approx(1.0)
    np.testing.assert_allclose(segment.states[-1, 1:3], reference[1:3], atol=1e-6)
    assert segment.p_drift <= 1e-8


def test_shell_is_preserved_along_samples():
    metric = conformal_metric(speed_radial, 2)
    rho = phase_point_from_direction(metric, [0.0, 0.0], [1.0, 1.0], tau=-1.0)
    segment = flow_interior(metric, rho, 1.0)
    for _, sample in segment.samples()[::10]:
        assert abs(wave_symbol(metric, sample)) <= 1e-8


def test_preconditions():
    metric, domain = flat_metric(2), create_unit_square()
    off_shell = PhasePoint(t=0.0, x=np.array([0.5, 0.5]), tau=1.0, xi=np.array([2.0, 0.0]))
    with pytest.raises(PreconditionError):
        flow_interior(metric, off_shell, 1.0, domain=domain)

    outside = phase_point_from_direction(metric, [1.5, 0.5], [1.0, 0.0])
    with pytest.raises(PreconditionError):
        flow_interior(metric, outside, 1.0, domain=domain)


def test_missing_derivative_oracle():
    metric = create_metric(lambda x: jnp.eye(2), 2, derivative=None)
    rho = phase_point_from_direction(metric, [0.5, 0.5], [1.0, 0.0])
    with pytest.raises(ConfigurationError):
        flow_interior(metric, rho, 0.1)
