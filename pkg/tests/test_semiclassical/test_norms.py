import jax.numpy as jnp
import numpy as np
import pytest

from gcckit.semiclassical import (
    commutator,
    commutator_decay,
    create_grid,
    fourier_multiplier,
    kernel_and_schur,
    multiplication_operator,
    operator_norm,
    phase_bump,
    quantize,
)

from .cases.symbols import case_gaussian, chi, random_symbols

X_SAMPLES = np.array([[0.0], [1.0], [2.5]])


@pytest.fixture(scope="module")
def gaussian_kernel():
    return kernel_and_schur(case_gaussian(), X_SAMPLES)


def test_gaussian_kernel_is_gaussian(gaussian_kernel):
    v = gaussian_kernel.v[:, 0]
    expected = np.asarray(chi(jnp.asarray(X_SAMPLES)))[:, None] * np.exp(-0.5 * v**2) / np.sqrt(2 * np.pi)
    np.testing.assert_allclose(gaussian_kernel.values, expected, atol=1e-10)
    np.testing.assert_allclose(gaussian_kernel.sample([0.0]).real[:, 0], expected.max(axis=1), rtol=1e-10)


def test_schur_bounds_of_the_gaussian(gaussian_kernel):
    # int sup_x |k| dv = max chi
    assert gaussian_kernel.schur_bound == pytest.approx(1.5, rel=1e-6)
    assert gaussian_kernel.reliable
    assert gaussian_kernel.schur_bound <= gaussian_kernel.decay_bound
    assert gaussian_kernel.to_dict()["ratio"] == pytest.approx(gaussian_kernel.ratio)


def test_xi_derivatives_multiply_the_kernel_by_minus_i_v(gaussian_kernel):
    symbol = case_gaussian()
    derivative = kernel_and_schur(symbol.derivative_xi(0), X_SAMPLES)
    v = gaussian_kernel.v[:, 0]
    np.testing.assert_allclose(derivative.values, -1j * v[None, :] * gaussian_kernel.values, atol=1e-9)


def test_probed_norms_stay_below_the_schur_bound():
    grid = create_grid(1, 256)
    for symbol in random_symbols(20):
        bound = kernel_and_schur(symbol, grid.points[::16]).schur_bound
        norm = operator_norm(quantize(symbol, 0.2, grid)).value
        assert norm <= 1.05 * bound, symbol.name


def test_power_iteration_on_a_multiplier():
    grid = create_grid(1, 64)
    op = fourier_multiplier(lambda xi: 1.0 / (1.0 + xi[..., 0] ** 2), 0.5, grid)
    probe = operator_norm(op)
    assert probe.converged
    assert probe.value == pytest.approx(1.0, rel=1e-2)


# ------------------------------------------------------------------------------
# Commutators
# ------------------------------------------------------------------------------


BUMP = phase_bump([np.pi], [1.0], 1.0, 0.5)


def test_constant_multipliers_commute():
    grid = create_grid(1, 64)
    op = commutator(quantize(BUMP, 0.1, grid), multiplication_operator(grid, lambda x: 3.0 + 0.0 * x[..., 0]))
    assert operator_norm(op).value <= 1e-10


def test_commutators_decay_like_h():
    table = commutator_decay(BUMP, lambda x: jnp.sin(x[..., 0]), [0.2, 0.1, 0.05, 0.025])
    assert [row["h"] for row in table.rows] == [0.2, 0.1, 0.05, 0.025]
    assert table.slope >= 0.9
    assert table.corrected_slope > 1.0
    norms = [row["norm"] for row in table.rows]
    assert all(b <= 1.1 * a for a, b in zip(norms, norms[1:], strict=False))
    assert all(row["corrected_norm"] < row["norm"] for row in table.rows[1:])
