import argparse
from pathlib import Path

import numpy as np
import pytest

from gcckit.cli.commands import divide, measure, observe, parse_initial_point, spectrum
from gcckit.config import load_config
from gcckit.errors import ConfigurationError
from gcckit.geometry import conformal_metric, flat_metric
from gcckit.geometry.hamiltonian import symbol_value, velocity

CONFIGS = Path(__file__).parents[2] / "configs"


# ------------------------------------------------------------------------------
# Initial points
# ------------------------------------------------------------------------------


@pytest.mark.parametrize(
    ("text", "expected"),
    [
        pytest.param("x=0,0;dir=30deg", [np.sqrt(3) / 2, 0.5], id="degrees"),
        pytest.param("x=0.1,0.2;dir=1.5707963267948966rad", [0.0, 1.0], id="radians"),
        pytest.param("x=0,0;dir=3,4", [0.6, 0.8], id="vector"),
    ],
)
def test_directions_set_the_ray_velocity(text, expected):
    metric = flat_metric(2)
    rho = parse_initial_point(text, metric)
    np.testing.assert_allclose(velocity(metric, rho), expected, atol=1e-12)
    assert rho.tau == 1.0
    assert abs(float(symbol_value(metric, rho.x, rho.tau, rho.xi))) <= 1e-12


def test_one_dimensional_direction_and_backward_tau():
    metric = conformal_metric(lambda x: 2.0 + 0.0 * x[..., 0], 1)
    rho = parse_initial_point("x=0.5;dir=-1;tau=-1", metric)
    np.testing.assert_allclose(velocity(metric, rho), [-2.0], rtol=1e-12)
    assert rho.tau == -1.0


def test_covector_is_taken_as_given():
    rho = parse_initial_point("x=0.5;xi=-2;tau=2", flat_metric(1))
    np.testing.assert_allclose(rho.xi, [-2.0])
    assert rho.tau == 2.0


@pytest.mark.parametrize(
    ("text", "match"),
    [
        pytest.param("dir=30deg", "position", id="no-position"),
        pytest.param("x=0,0", "direction", id="no-direction"),
        pytest.param("x=0,0;30deg", "key=value", id="no-key"),
        pytest.param("x=0,a;dir=1,0", "x=", id="not-a-number"),
        pytest.param("x=0,0;dir=1,0,0", "dimension", id="wrong-dimension"),
    ],
)
def test_malformed_initial_points(text, match):
    with pytest.raises(ConfigurationError, match=match):
        parse_initial_point(text, flat_metric(2))


# ------------------------------------------------------------------------------
# Commands
# ------------------------------------------------------------------------------


def test_spectrum_command_on_the_interval():
    result = spectrum(load_config(CONFIGS / "interval.toml"), argparse.Namespace(count=5, jobs=None))
    nu = np.arange(1, 6)
    np.testing.assert_allclose(result.results["lambdas"], (nu * np.pi) ** 2, rtol=1e-2)
    assert [row["nu"] for row in result.tables["spectrum"]] == list(nu)
    assert result.exit_code == 0


def test_observe_command_sweeps_the_settled_bands():
    result = observe(load_config(CONFIGS / "interval.toml"), argparse.Namespace(time=None, k=None, jobs=None))
    results = result.results
    assert results["T"] == 1.0
    assert results["ks"] == [6, 7, 8, 9, 10, 11]
    assert all(row["size"] >= 6 for row in results["bands"])
    assert results["spread"] <= 3.0
    assert results["bounded"]


def test_observe_command_honours_explicit_bands():
    config = load_config(CONFIGS / "interval.toml")
    result = observe(config, argparse.Namespace(time=None, k=[6, 7], jobs=None))
    assert [row["k"] for row in result.results["bands"]] == [6, 7]


def test_divide_command_matches_the_polynomial_remainder():
    # zeta^3 + tau zeta = (zeta^2 - tau^2 + 1) zeta + (tau^2 + tau - 1) zeta
    result = divide(load_config(CONFIGS / "halfplane.toml"), argparse.Namespace(jobs=None))
    points = result.results["points"]
    assert len(points) == 8
    for point in points:
        tau = point["tau"]
        assert abs(point["b0"]) <= 1e-10
        assert abs(point["b1"] - (tau**2 + tau - 1)) <= 1e-10
    assert sum(point["confluent"] for point in points) == 2
    assert result.results["max_residual_away"] <= 1e-10
    assert set(result.tables["divide"][0]) == {"t", "tau", "b0_re", "b0_im", "b1_re", "b1_im", "confluent"}


def test_measure_command_concentrates_on_the_packet_centre():
    result = measure(load_config(CONFIGS / "interval.toml"), argparse.Namespace(jobs=None))
    symbols = result.results["symbols"]
    centre_re, centre_im = symbols["centre"]["pairings"][-1]
    assert abs(centre_re - 1.0) <= 0.05
    assert abs(centre_im) <= 0.05
    assert abs(complex(*symbols["off"]["pairings"][-1])) <= 1e-3
    assert not result.results["leaked"]
    assert set(result.figures) == {"measure", "phase_space"}


def test_measure_command_needs_symbols(tmp_path):
    path = tmp_path / "empty.toml"
    path.write_text('[domain]\nkind = "interval"\n', encoding="utf-8")
    with pytest.raises(ConfigurationError, match="symbol"):
        measure(load_config(path), argparse.Namespace(jobs=None))
