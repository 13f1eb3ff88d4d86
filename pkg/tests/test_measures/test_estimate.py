import jax.numpy as jnp
import numpy as np
import pytest

from gcckit.errors import PreconditionError
from gcckit.measures import (
    LadderSample,
    basis_packet,
    cauchy_schwarz_defect,
    dyadic_project,
    estimate_hermitian,
    estimate_measure,
    extrapolate,
)
from gcckit.semiclassical import create_symbol, phase_bump, smooth_bump

from .cases.sequences import X0, XI0, fine_interval_basis, packet_ladder

HS = [2.0**-6, 2.0**-7, 2.0**-8]


@pytest.fixture(scope="module")
def ladder():
    return packet_ladder(HS)


@pytest.fixture(scope="module")
def estimate(ladder):
    bank = [
        phase_bump([X0], [XI0], 0.5, 0.5, name="on"),
        phase_bump([X0 / 2], [XI0], 0.5, 0.5, name="off"),
    ]
    return estimate_measure([packet.sample for packet in ladder], bank)


def test_pairings_concentrate_at_the_packet_centre(estimate):
    # a(x0, xi0) ||psi||^2 = 1
    assert estimate.pairing("on").real == pytest.approx(1.0, rel=0.05)
    assert abs(estimate.pairing("on").imag) < 0.05
    assert estimate.limit("on").real == pytest.approx(1.0, rel=0.05)
    assert list(estimate.hs) == sorted(HS, reverse=True)


def test_disjoint_symbols_pair_to_zero(estimate):
    assert abs(estimate.pairing("off")) < 1e-6


def test_reports_carry_every_rung(estimate):
    report = estimate.to_dict()
    assert len(report["symbols"]["on"]["pairings"]) == len(HS)
    assert report["mass_conserved"] is None
    assert not report["leaked"]


def test_partitions_of_unity_conserve_mass(ladder):
    bank = {
        "left": create_symbol(lambda x, xi: jnp.cos(0.5 * x[..., 0]) ** 2 + 0.0 * xi[..., 0], 1),
        "right": create_symbol(lambda x, xi: jnp.sin(0.5 * x[..., 0]) ** 2 + 0.0 * xi[..., 0], 1),
    }
    result = estimate_measure([packet.sample for packet in ladder], bank, partition_of_unity=True)
    assert result.mass_conserved
    assert result.mass_defect < 1e-10


def test_leaks_disable_the_mass_check():
    ladder = packet_ladder(HS[:2], x0=0.1)
    bank = {"one": create_symbol(lambda x, xi: jnp.ones(jnp.broadcast_shapes(x.shape[:-1], xi.shape[:-1])), 1)}
    with pytest.warns(UserWarning, match="leak"):
        result = estimate_measure([packet.sample for packet in ladder], bank, partition_of_unity=True)
    assert result.leaked
    assert result.mass_conserved is None


def test_empty_sequences_are_rejected():
    with pytest.raises(PreconditionError):
        estimate_measure([], [phase_bump([X0], [XI0], 0.5, 0.5)])


def test_extrapolation_removes_linear_errors():
    limit, spread = extrapolate([0.2, 0.1], [1.0 + 0.2 * 3, 1.0 + 0.1 * 3])
    assert limit == pytest.approx(1.0)
    assert spread == pytest.approx(0.3)


# ------------------------------------------------------------------------------
# Hermitian blocks
# ------------------------------------------------------------------------------


def test_hermitian_blocks(ladder):
    packet = ladder[-1]
    far = packet_ladder([packet.h], x0=X0 / 2)[0]
    first = packet.sample
    second = LadderSample(packet.h, packet.grid, 2j * packet.values + far.values)
    symbol = phase_bump([X0], [XI0], 0.5, 0.5, name="a")
    result = estimate_hermitian([(first, second)], [symbol])
    block = result.block("a")
    np.testing.assert_allclose(block, [[1.0, -2j], [2j, 4.0]], atol=0.1)
    assert result.hermitian_defect < 1e-2
    # a >= 0 is its own modulus
    assert cauchy_schwarz_defect(result, "a", "a") < 1e-2


def test_hermitian_pairs_share_the_grid(ladder):
    with pytest.raises(PreconditionError):
        estimate_hermitian([(ladder[0].sample, ladder[1].sample)], [phase_bump([X0], [XI0], 0.5, 0.5)])


# ------------------------------------------------------------------------------
# Dyadic projection
# ------------------------------------------------------------------------------


def band(s):
    return s * smooth_bump((s - 1.0) / 0.8)


def test_identity_band_returns_the_data():
    basis = fine_interval_basis()
    v = basis_packet(basis, [0.5], [1.0], 1 / 80)
    projected = dyadic_project(basis, np.ones_like, 1 / 80, v)
    np.testing.assert_allclose(basis.expand(projected), basis.expand(v), atol=1e-10)


def test_bands_missing_the_packet_remove_it():
    basis = fine_interval_basis()
    h = 1 / 80
    v = basis_packet(basis, [0.5], [1.0], h)
    projected = dyadic_project(basis, lambda s: smooth_bump(np.asarray(s) - 3.0), h, v)
    assert basis.norm(projected) <= np.sqrt(h) * basis.norm(v)


def test_projection_remainder_decays_like_sqrt_h():
    basis = fine_interval_basis()
    hs = [1 / 40, 1 / 80, 1 / 160]
    errors = []
    for h in hs:
        v = basis_packet(basis, [0.5], [1.0], h)
        errors.append(basis.norm(dyadic_project(basis, band, h, v) - band(1.0) * v) / basis.norm(v))
    slope = np.polyfit(np.log(hs), np.log(errors), 1)[0]
    assert slope >= 0.4


def test_truncated_spectra_warn():
    basis = fine_interval_basis()
    v = basis_packet(basis, [0.5], [1.0], 1 / 1000)
    with pytest.warns(UserWarning, match="capture"):
        dyadic_project(basis, np.ones_like, 1 / 1000, v)
