import jax.numpy as jnp
import numpy as np
import pytest

from gcckit.errors import AliasingError
from gcckit.measures import (
    LadderSample,
    create_packet,
    husimi_density,
    mass_leak,
    profile_norm,
    sobolev_ratio,
)
from gcckit.semiclassical import create_grid

from .cases.sequences import packet_grid, packet_ladder


@pytest.mark.parametrize("h", [2.0**-4, 2.0**-6, 2.0**-8])
def test_packets_keep_the_profile_norm(h):
    (packet,) = packet_ladder([h])
    assert packet.norm() == pytest.approx(1.0, rel=1e-8)


def test_custom_profiles_are_normalised_by_quadrature():
    def profile(y):
        return jnp.exp(-(y[..., 0] ** 2))

    # int exp(-2 y^2) dy = sqrt(pi / 2)
    assert profile_norm(profile, 1) ** 2 == pytest.approx(np.sqrt(np.pi / 2), rel=1e-10)
    packet = create_packet(packet_grid(2.0**-6), [np.pi], [1.0], 2.0**-6, profile)
    assert packet.norm() == pytest.approx(packet.profile_norm, rel=1e-8)


@pytest.mark.parametrize("s", [1.0, 2.0])
def test_sobolev_scaling(s):
    (packet,) = packet_ladder([2.0**-6])
    assert sobolev_ratio(packet, s) == pytest.approx(1.0, rel=0.1)


def test_packets_that_alias_are_rejected():
    with pytest.raises(AliasingError) as info:
        create_packet(create_grid(1, 64), [np.pi], [1.0], 2.0**-6)
    assert info.value.required_size > 64


def test_centred_packets_do_not_leak():
    (packet,) = packet_ladder([2.0**-6])
    report = mass_leak(packet.sample)
    assert not report.leaked
    assert report.to_dict()["spatial_tail"] < 1e-10


def test_packets_at_the_box_edge_leak():
    (packet,) = packet_ladder([2.0**-6], x0=0.1)
    assert mass_leak(packet.sample).leaked


def test_frequency_tails_leak():
    grid = create_grid(1, 64)
    values = jnp.exp(1j * 31 * jnp.asarray(grid.axis))
    report = mass_leak(LadderSample(1.0, grid, values))
    assert report.frequency_tail == pytest.approx(1.0)
    assert report.leaked


def test_phase_space_density_peaks_at_the_packet_centre():
    (packet,) = packet_ladder([2.0**-6])
    centres, frequencies, density = husimi_density(packet.sample, n_centres=128)
    assert density.sum() == pytest.approx(1.0)
    i, j = np.unravel_index(np.argmax(density), density.shape)
    assert centres[i] == pytest.approx(np.pi, abs=0.1)
    assert frequencies[j] == pytest.approx(1.0, abs=0.1)
