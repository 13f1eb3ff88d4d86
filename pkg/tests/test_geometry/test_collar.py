import jax.numpy as jnp
import numpy as np
import pytest
import pytest_cases

from gcckit.errors import CollarTooWideError
from gcckit.geometry import (
    build_collar_chart,
    create_disc,
    create_interval,
    create_level_set,
    create_metric,
    create_unit_square,
    flat_metric,
)
from gcckit.geometry.hamiltonian import PhasePoint

from .cases.metrics import case_conformal_fd, case_conformal_radial, case_flat, case_matrix


def test_disc_chart_is_polar():
    chart = build_collar_chart(create_disc(), flat_metric(2), 0.2)
    sigma, z = 0.7, 0.15
    np.testing.assert_allclose(
        chart.map(sigma, z), (1 - z) * np.array([np.cos(sigma), np.sin(sigma)]), atol=1e-14
    )
    pulled = chart.metric_in_chart(sigma, 0.0)
    assert pulled[1, 1] == pytest.approx(1.0)
    assert pulled[0, 1] == pytest.approx(0.0, abs=1e-14)


def test_interval_normal_is_normalised():
    metric = create_metric(lambda x: 4.0 * jnp.eye(1), 1)
    chart = build_collar_chart(create_interval(), metric)
    np.testing.assert_allclose(chart.normal_g(0.0), [0.5])
    np.testing.assert_allclose(chart.normal_g(1.0), [-0.5])


def test_square_edge_chart_is_rigid():
    chart = build_collar_chart(create_unit_square(), flat_metric(2), 0.2)
    np.testing.assert_allclose(chart.jacobian(0.3, 0.1), np.eye(2), atol=1e-14)
    np.testing.assert_allclose(chart.map(0.3, 0.1), [0.3, 0.1], atol=1e-14)


def test_collar_too_wide():
    with pytest.raises(CollarTooWideError):
        build_collar_chart(create_disc(), flat_metric(2), 0.95)


@pytest_cases.parametrize_with_cases(
    "case", cases=[case_flat, case_conformal_radial, case_conformal_fd, case_matrix]
)
def test_block_structure_on_the_disc(case):
    chart = build_collar_chart(create_disc(), case.metric, 0.2)
    assert chart.block_defect <= chart.tol_chart


def test_block_structure_on_a_level_set():
    domain = create_level_set(
        lambda x: 1.0 - (x[..., 0] / 0.8) ** 2 - (x[..., 1] / 0.6) ** 2,
        ((-1.0, 1.0), (-1.0, 1.0)),
    )
    chart = build_collar_chart(domain, flat_metric(2), 0.1, n_samples=16)
    assert chart.block_defect <= 1e-8


def test_inverse_and_chart_coordinates():
    chart = build_collar_chart(create_disc(), flat_metric(2), 0.2)
    sigma, z = chart.inverse(0.9 * np.array([np.cos(1.0), np.sin(1.0)]))
    assert sigma == pytest.approx(1.0)
    assert z == pytest.approx(0.1)

    rho = PhasePoint(t=0.0, x=np.array([0.0, -0.95]), tau=1.0, xi=np.array([0.6, -0.8]))
    point = chart.to_chart(rho)
    assert point.zeta == pytest.approx(-0.8)
    np.testing.assert_allclose(chart.from_chart(point).xi, rho.xi, atol=1e-12)
