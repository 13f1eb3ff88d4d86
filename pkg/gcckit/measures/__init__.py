"""Semiclassical measure estimates, wave packets and transport checks."""

from .estimate import (
    HermitianMeasureEstimate,
    MeasureEstimate,
    cauchy_schwarz_defect,
    dyadic_project,
    estimate_hermitian,
    estimate_measure,
    extrapolate,
    pairing,
)
from .packets import (
    LadderSample,
    LeakReport,
    WavePacket,
    basis_packet,
    basis_to_grid,
    create_packet,
    gaussian_profile,
    husimi_density,
    mass_leak,
    packet_function,
    profile_norm,
    sobolev_ratio,
)
from .transport import (
    IsochroneReport,
    JumpReport,
    JumpRung,
    SpaceTimeSample,
    TransportResidual,
    boundary_jump_residual,
    flat_hamiltonian,
    half_line_reflection,
    interior_transport_residual,
    isochrone_check,
    propagate,
    space_time_pairings,
)

__all__ = [
    "HermitianMeasureEstimate",
    "IsochroneReport",
    "JumpReport",
    "JumpRung",
    "LadderSample",
    "LeakReport",
    "MeasureEstimate",
    "SpaceTimeSample",
    "TransportResidual",
    "WavePacket",
    "basis_packet",
    "basis_to_grid",
    "boundary_jump_residual",
    "cauchy_schwarz_defect",
    "create_packet",
    "dyadic_project",
    "estimate_hermitian",
    "estimate_measure",
    "extrapolate",
    "flat_hamiltonian",
    "gaussian_profile",
    "husimi_density",
    "half_line_reflection",
    "interior_transport_residual",
    "isochrone_check",
    "mass_leak",
    "packet_function",
    "pairing",
    "profile_norm",
    "propagate",
    "sobolev_ratio",
    "space_time_pairings",
]
