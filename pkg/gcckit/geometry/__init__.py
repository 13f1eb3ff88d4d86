"""Domains, rough metrics, the wave symbol and boundary collar charts."""

from .collar import (
    BoundaryFrame,
    ChartPoint,
    CollarChart,
    build_collar_chart,
)
from .domain import (
    DOMAIN_FACTORIES,
    Domain,
    create_disc,
    create_domain,
    create_half_plane,
    create_interval,
    create_level_set,
    create_rectangle,
    create_unit_square,
)
from .hamiltonian import (
    PhasePoint,
    flip_covector,
    hamiltonian_field,
    phase_point_from_direction,
    project_to_shell,
    time_reverse,
    velocity,
    wave_symbol,
)
from .metric import (
    DEFAULT_TOLERANCES,
    MetricField,
    Tolerances,
    certify_metric,
    conformal_metric,
    create_metric,
    flat_metric,
    scaled_metric,
)
from .perturb import lipschitz_perturb

__all__ = [
    "DEFAULT_TOLERANCES",
    "DOMAIN_FACTORIES",
    "BoundaryFrame",
    "ChartPoint",
    "CollarChart",
    "Domain",
    "MetricField",
    "PhasePoint",
    "Tolerances",
    "build_collar_chart",
    "certify_metric",
    "conformal_metric",
    "create_disc",
    "create_domain",
    "create_half_plane",
    "create_interval",
    "create_level_set",
    "create_metric",
    "create_rectangle",
    "create_unit_square",
    "flat_metric",
    "flip_covector",
    "hamiltonian_field",
    "lipschitz_perturb",
    "phase_point_from_direction",
    "project_to_shell",
    "scaled_metric",
    "time_reverse",
    "velocity",
    "wave_symbol",
]
