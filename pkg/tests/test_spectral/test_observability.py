import numpy as np
import pytest

from gcckit.control import (
    create_endpoint_region,
    create_interval_region,
    create_strip_region,
    create_whole_region,
)
from gcckit.errors import DenseSizeError, PreconditionError
from gcckit.geometry import create_interval, create_unit_square, flat_metric
from gcckit.spectral import (
    DyadicSpec,
    assemble_and_eig,
    covered_bands,
    obs_constant_dyadic,
    obs_constant_window,
    observability_sweep,
    sweep_trend,
    time_integrals,
)

from .cases.bases import interval_basis


@pytest.fixture(scope="module")
def basis():
    return interval_basis()


def test_time_integrals_are_exact_and_hermitian():
    frequencies = np.array([0.0, 1.0, 2.5, -2.5])
    table = time_integrals(frequencies, (0.5, 2.0))
    np.testing.assert_allclose(np.diag(table), 1.5)
    np.testing.assert_allclose(table, table.conj().T, atol=1e-15)
    # int_0.5^2 e^{it} dt
    expected = (np.exp(2j) - np.exp(0.5j)) / 1j
    assert table[1, 0] == pytest.approx(expected)


def test_whole_domain_constant_is_bounded_by_the_band(basis):
    spec = DyadicSpec()
    region = create_whole_region(basis.mesh.domain)
    length = 0.9
    for k in covered_bands(spec, basis):
        result = obs_constant_dyadic(basis, spec, k, region, 1.0)
        assert result.interval == pytest.approx((0.05, 0.95))
        assert spec.alpha**2 / length <= result.C <= 1 / (spec.alpha**2 * length)


def test_controlled_window_has_finite_constants(basis):
    spec = DyadicSpec()
    rows = observability_sweep(basis, spec, create_interval_region(0.3, 0.6), 1.0, covered_bands(spec, basis))
    assert rows
    assert all(row["C"] is not None and row["C"] > 0 for row in rows)
    assert {"k", "h", "size", "C", "lambda_min"} <= set(rows[0])


@pytest.fixture(scope="module")
def fine_basis():
    return interval_basis(1601, 80)


def test_controlled_window_is_bounded_over_settled_bands(fine_basis):
    # T = 1.0 exceeds the control time 0.8 of (0.3, 0.6)
    spec = DyadicSpec()
    bands = covered_bands(spec, fine_basis, min_size=6)
    assert len(bands) >= 5
    rows = observability_sweep(fine_basis, spec, create_interval_region(0.3, 0.6), 1.0, bands)
    constants = [row["C"] for row in rows]
    assert all(c is not None for c in constants)
    assert max(constants) / min(constants) <= 3.0
    trend = sweep_trend(rows)
    assert trend["bounded"]
    assert trend["ks"] == bands


def test_short_observation_loses_the_window(basis):
    # T = 0.5 is below the control time 0.8
    spec = DyadicSpec()
    rows = observability_sweep(basis, spec, create_interval_region(0.3, 0.6), 0.5, covered_bands(spec, basis))
    trend = sweep_trend(rows)
    assert trend["growth"] >= 5.0
    assert not trend["bounded"]


def test_trend_of_rows():
    rows = [
        {"k": 0, "size": 0, "C": None},
        {"k": 1, "size": 2, "C": 2.0},
        {"k": 2, "size": 3, "C": 1.0},
        {"k": 3, "size": 5, "C": 4.0},
    ]
    trend = sweep_trend(rows)
    assert trend["ks"] == [1, 2, 3]
    assert trend["spread"] == pytest.approx(4.0)
    assert trend["growth"] == pytest.approx(2.0)
    assert not trend["bounded"]
    assert sweep_trend(rows, bound=5.0)["bounded"]
    degenerate = sweep_trend([*rows, {"k": 4, "size": 7, "C": None}])
    assert degenerate["growth"] == np.inf
    assert sweep_trend(rows[:1])["spread"] is None


def test_empty_bands_are_reported_without_a_constant(basis):
    spec = DyadicSpec()
    (row,) = observability_sweep(basis, spec, create_interval_region(0.3, 0.6), 1.0, [0])
    assert row["size"] == 0
    assert row["C"] is None
    with pytest.raises(PreconditionError):
        obs_constant_dyadic(basis, spec, 0, create_interval_region(0.3, 0.6), 1.0)


def test_boundary_observation_of_a_controlling_endpoint(basis):
    spec = DyadicSpec()
    region = create_endpoint_region(create_interval(), [0.0])
    for k in covered_bands(spec, basis):
        result = obs_constant_dyadic(basis, spec, k, region, 2.5)
        assert np.isfinite(result.C)


def test_observation_must_match_the_region(basis):
    spec = DyadicSpec()
    with pytest.raises(PreconditionError):
        obs_constant_dyadic(basis, spec, 2, create_interval_region(0.3, 0.6), 1.0, observation="dn")
    with pytest.raises(PreconditionError):
        obs_constant_dyadic(basis, spec, 2, create_endpoint_region(create_interval(), [0.0]), 1.0, observation="dt")


def test_dense_limit(basis):
    spec = DyadicSpec()
    k = covered_bands(spec, basis)[-1]
    with pytest.raises(DenseSizeError):
        obs_constant_dyadic(basis, spec, k, create_interval_region(0.3, 0.6), 1.0, max_dense=1)


def test_window_constant_of_the_whole_domain(basis):
    # distinct modes decouple; each contributes |I| -+ |sin(w |I|)| / w
    region = create_whole_region(basis.mesh.domain)
    result = obs_constant_window(basis, range(5), region, 3.0, delta=0.0)
    w1 = basis.sqrt_lambdas[0]
    assert result.size == 10
    assert 1 / (3.0 + 1 / w1) <= result.C <= 1 / (3.0 - 1 / w1)


@pytest.mark.slow
def test_strip_missing_the_bouncing_balls_loses_observability():
    basis = assemble_and_eig(create_unit_square(), flat_metric(2), 61, 200)
    spec = DyadicSpec()
    bands = covered_bands(spec, basis)
    rows = observability_sweep(basis, spec, create_strip_region(0, hi=0.3), 3.0, bands)
    constants = [row["C"] for row in rows if row["size"] > 0]
    assert constants[-1] >= 10 * constants[0]
    whole = observability_sweep(basis, spec, create_whole_region(basis.mesh.domain), 3.0, bands)
    assert all(row["C"] <= 1 / (spec.alpha**2 * 2.7) for row in whole if row["size"] > 0)
