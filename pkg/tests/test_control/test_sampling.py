import numpy as np
import pytest

from gcckit.control import SamplingSpec, directions, local_samples, phase_space_samples
from gcckit.errors import ConfigurationError
from gcckit.geometry import (
    create_disc,
    create_interval,
    flat_metric,
    velocity,
    wave_symbol,
)


def test_interval_samples_cover_both_directions():
    metric = flat_metric(1)
    samples = phase_space_samples(metric, create_interval(), SamplingSpec(spacing=0.1))
    assert len(samples) == 20
    assert {float(np.sign(velocity(metric, rho)[0])) for rho in samples} == {-1.0, 1.0}
    for rho in samples:
        assert rho.tau == 1.0
        assert wave_symbol(metric, rho) == pytest.approx(0.0, abs=1e-14)


def test_disc_samples_keep_the_margin():
    metric, disc = flat_metric(2), create_disc()
    spec = SamplingSpec(spacing=0.2, n_angles=6, margin=0.1)
    samples = phase_space_samples(metric, disc, spec)
    assert len(samples) % 6 == 0
    for rho in samples:
        assert np.linalg.norm(rho.x) <= 0.9 + 1e-12
        assert np.linalg.norm(velocity(metric, rho)) == pytest.approx(1.0)


def test_directions_are_uniform():
    dirs = directions(2, 4)
    np.testing.assert_allclose(dirs, [[1, 0], [0, 1], [-1, 0], [0, -1]], atol=1e-15)
    np.testing.assert_array_equal(directions(1, 16), [[1.0], [-1.0]])


def test_local_samples_fan_around_the_failure():
    metric, disc = flat_metric(2), create_disc()
    spec = SamplingSpec(spacing=0.2, n_angles=8, refine_factor=4)
    (rho,) = [
        s for s in phase_space_samples(metric, disc, spec)
        if np.allclose(s.x, [0.1, 0.1]) and np.allclose(velocity(metric, s), [0.0, 1.0])
    ]
    refined = local_samples(metric, disc, rho, spec)
    assert len(refined) == 9 * 5
    angles = {
        round(float(np.arctan2(*velocity(metric, s)[::-1])), 12) for s in refined
    }
    assert max(angles) - min(angles) == pytest.approx(2 * np.pi / 8)


def test_invalid_specs():
    with pytest.raises(ConfigurationError):
        SamplingSpec(spacing=0.0)
    with pytest.raises(ConfigurationError):
        SamplingSpec(n_angles=0)
    with pytest.raises(ConfigurationError):
        phase_space_samples(flat_metric(1), create_interval(), SamplingSpec(spacing=0.5, margin=0.4))
