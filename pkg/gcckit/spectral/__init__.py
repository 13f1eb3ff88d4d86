"""Dirichlet eigenbases, spectral wave evolution and observability constants."""

from .assemble import EigenBasis, assemble, assemble_and_eig, volume_weight
from .dyadic import DyadicSpec, covered_bands, dyadic_index_set
from .evolve import (
    BoundaryTrace,
    NormalDerivatives,
    WaveState,
    energies,
    evolve,
    initial_state,
    mode_normal_derivatives,
    neumann_trace,
    packet,
)
from .mesh import MESH_BUILDERS, Mesh, create_mesh, fitted_mesh, tensor_mesh
from .observability import (
    ObservabilityConstant,
    obs_constant_dyadic,
    obs_constant_window,
    observability_sweep,
    sweep_trend,
    region_overlap,
    spectrum_rows,
    time_integrals,
)

__all__ = [
    "MESH_BUILDERS",
    "BoundaryTrace",
    "DyadicSpec",
    "EigenBasis",
    "Mesh",
    "NormalDerivatives",
    "ObservabilityConstant",
    "WaveState",
    "assemble",
    "assemble_and_eig",
    "covered_bands",
    "create_mesh",
    "dyadic_index_set",
    "energies",
    "evolve",
    "fitted_mesh",
    "initial_state",
    "mode_normal_derivatives",
    "neumann_trace",
    "obs_constant_dyadic",
    "obs_constant_window",
    "observability_sweep",
    "packet",
    "region_overlap",
    "spectrum_rows",
    "sweep_trend",
    "tensor_mesh",
    "time_integrals",
    "volume_weight",
]
