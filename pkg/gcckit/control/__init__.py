"""Observation regions, phase-space sampling and geometric control checkers."""

from .gcc import (
    GccReport,
    TgccEstimate,
    Witness,
    check_boundary_gcc,
    check_gcc,
    check_interior_gcc,
    check_weak_gcc,
    estimate_T_gcc,
    first_boundary_hit,
    first_interior_hit,
    perturbation_sweep,
    refine_failures,
    verify_witness,
)
from .regions import (
    REGION_FACTORIES,
    ObservationRegion,
    create_arc_region,
    create_ball_region,
    create_box_region,
    create_endpoint_region,
    create_expression_region,
    create_full_boundary_region,
    create_interval_region,
    create_region,
    create_strip_region,
    create_whole_region,
)
from .sampling import SamplingSpec, directions, local_samples, phase_space_samples

__all__ = [
    "REGION_FACTORIES",
    "GccReport",
    "ObservationRegion",
    "SamplingSpec",
    "TgccEstimate",
    "Witness",
    "check_boundary_gcc",
    "check_gcc",
    "check_interior_gcc",
    "check_weak_gcc",
    "create_arc_region",
    "create_ball_region",
    "create_box_region",
    "create_endpoint_region",
    "create_expression_region",
    "create_full_boundary_region",
    "create_interval_region",
    "create_region",
    "create_strip_region",
    "create_whole_region",
    "directions",
    "estimate_T_gcc",
    "first_boundary_hit",
    "first_interior_hit",
    "local_samples",
    "perturbation_sweep",
    "phase_space_samples",
    "refine_failures",
    "verify_witness",
]
