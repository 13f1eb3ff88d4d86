import jax.numpy as jnp
import numpy as np
import pytest

from gcckit.errors import UnsupportedSymbolError
from gcckit.semiclassical import euclidean_divide

Y = np.array([[0.0], [0.4], [1.3]])
ETA = np.array([[0.0], [0.5], [-1.0]])


def radius(eta):
    return 1.0 + eta[..., 0] ** 2


def p_hyperbolic(y, eta, zeta):
    return zeta**2 - radius(eta) ** 2


def zeta_grid():
    # contains the roots +-r exactly
    return np.unique(np.concatenate([np.linspace(-4.0, 4.0, 81), [-1.0, 1.0, 1.25, -1.25, 2.0, -2.0]]))


def test_dividing_zeta():
    result = euclidean_divide(lambda y, eta, zeta: zeta, p_hyperbolic, Y, ETA, zeta_grid())
    np.testing.assert_allclose(result.b0, 0.0, atol=1e-14)
    np.testing.assert_allclose(result.b1, 1.0, atol=1e-14)
    np.testing.assert_allclose(result.q, 0.0, atol=1e-12)


def test_dividing_zeta_squared():
    result = euclidean_divide(lambda y, eta, zeta: zeta**2, p_hyperbolic, Y, ETA, zeta_grid())
    np.testing.assert_allclose(result.b0, radius(ETA) ** 2, atol=1e-12)
    np.testing.assert_allclose(result.b1, 0.0, atol=1e-12)
    np.testing.assert_allclose(result.q, 1.0, atol=1e-10)
    assert result.near_root.any()


def test_hyperbolic_remainder_is_the_root_difference_quotient():
    def b(y, eta, zeta):
        return jnp.exp(zeta) * jnp.cos(y[..., 0]) + eta[..., 0] * zeta**3

    zeta = zeta_grid()
    result = euclidean_divide(b, p_hyperbolic, Y, ETA, zeta)
    r = radius(ETA)
    expected = (np.asarray(b(Y, ETA, r)) - np.asarray(b(Y, ETA, -r))) / (2 * r)
    np.testing.assert_allclose(result.b1, expected, rtol=1e-12)

    values = np.asarray(b(Y[:, None, :], ETA[:, None, :], zeta[None, :]))
    away = ~result.near_root
    assert np.all(np.abs(result.residual[away]) <= 1e-10 * (1 + np.abs(values[away])))
    assert np.all(np.abs(result.residual[result.near_root]) <= 1e-2 * (1 + np.abs(values[result.near_root])))


def test_double_roots_use_the_derivative():
    def b(y, eta, zeta):
        return jnp.sin(zeta) + zeta**2

    result = euclidean_divide(b, lambda y, eta, zeta: zeta**2, Y, ETA, np.linspace(-1.0, 1.0, 21))
    assert result.confluent.all()
    np.testing.assert_allclose(result.b1, 1.0, atol=1e-12)
    np.testing.assert_allclose(result.b0, 0.0, atol=1e-12)
    assert result.to_dict()["confluent_points"] == len(Y)


def test_complex_roots_in_the_elliptic_region():
    # zeta^3 = zeta (zeta^2 + 1) - zeta
    zeta = np.linspace(-2.0, 2.0, 9)
    result = euclidean_divide(lambda y, eta, z: z**3, lambda y, eta, z: z**2 + 1.0, Y, ETA, zeta)
    np.testing.assert_allclose(result.b1, -1.0, atol=1e-12)
    np.testing.assert_allclose(result.b0, 0.0, atol=1e-12)
    np.testing.assert_allclose(result.q, np.broadcast_to(zeta, result.q.shape), atol=1e-12)


def test_cutoffs_scale_the_remainder():
    result = euclidean_divide(
        lambda y, eta, zeta: zeta, p_hyperbolic, Y, ETA, zeta_grid(), chi=lambda y, eta: 0.5 + 0.0 * y[..., 0]
    )
    np.testing.assert_allclose(result.b1, 0.5, atol=1e-14)


def test_non_quadratic_symbols_are_rejected():
    with pytest.raises(UnsupportedSymbolError):
        euclidean_divide(lambda y, eta, z: z, lambda y, eta, z: z**3 - 1.0, Y, ETA, [0.0])
