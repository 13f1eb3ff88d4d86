import numpy as np
import pytest

from gcckit.errors import ConfigurationError, SpectralBandError
from gcckit.spectral import DyadicSpec, covered_bands, dyadic_index_set

from .cases.bases import interval_basis


@pytest.fixture(scope="module")
def basis():
    return interval_basis()


def test_band_two_holds_the_first_mode(basis):
    spec = DyadicSpec(alpha=0.5, rho=1.5)
    assert spec.h(2) == pytest.approx(4 / 9)
    # sqrt(lambda) in [1.125, 4.5): only pi
    assert dyadic_index_set(spec, basis, 2).tolist() == [0]


def test_low_bands_can_be_empty(basis):
    spec = DyadicSpec(alpha=0.5, rho=1.5)
    assert dyadic_index_set(spec, basis, 0).tolist() == []


@pytest.mark.parametrize("k", [1, 3, 5])
def test_bands_are_symmetric_in_k(basis, k):
    spec = DyadicSpec()
    np.testing.assert_array_equal(dyadic_index_set(spec, basis, -k), dyadic_index_set(spec, basis, k))


def test_index_sets_obey_the_band_inequality(basis):
    spec = DyadicSpec(alpha=0.6, rho=1.4)
    for k in covered_bands(spec, basis):
        indices = dyadic_index_set(spec, basis, k)
        assert len(indices) > 0
        scaled = spec.h(k) * basis.sqrt_lambdas
        inside = (scaled >= spec.alpha) & (scaled < 1 / spec.alpha)
        assert set(indices.tolist()) == set(np.flatnonzero(inside).tolist())


def test_bands_beyond_the_spectrum_are_rejected(basis):
    # 2 * 1.5^9 > sqrt(lambda_20) ~ 20 pi
    with pytest.raises(SpectralBandError):
        dyadic_index_set(DyadicSpec(), basis, 9)


def test_small_bands_are_skipped_by_size():
    basis = interval_basis(1601, 80)
    spec = DyadicSpec()
    # band k holds the nu with 0.5 * 1.5^k <= nu pi < 2 * 1.5^k: 3 modes at k=5, 6 at k=6
    assert len(dyadic_index_set(spec, basis, 5)) == 3
    assert len(dyadic_index_set(spec, basis, 6)) == 6
    assert covered_bands(spec, basis, min_size=6) == [6, 7, 8, 9, 10, 11]
    assert covered_bands(spec, basis)[:2] == [2, 3]


def test_band_size_must_be_positive(basis):
    with pytest.raises(ConfigurationError):
        covered_bands(DyadicSpec(), basis, min_size=0)


@pytest.mark.parametrize(("alpha", "rho"), [(1.2, 1.1), (0.5, 2.5), (0.5, 1.0)])
def test_invalid_band_parameters(alpha, rho):
    with pytest.raises(ConfigurationError):
        DyadicSpec(alpha=alpha, rho=rho)
