"""Control configurations with known control times."""

from gcckit.control import (
    SamplingSpec,
    create_endpoint_region,
    create_full_boundary_region,
    create_interval_region,
    create_strip_region,
)
from gcckit.geometry import (
    build_collar_chart,
    create_disc,
    create_interval,
    create_unit_square,
    flat_metric,
)


class ControlCase:
    """A domain, a metric, an observation region and a sampling grid."""

    def __init__(self, name, domain, metric, region, sampling):
        self.name = name
        self.domain = domain
        self.metric = metric
        self.region = region
        self.sampling = sampling
        self.chart = build_collar_chart(domain, metric)

    def args(self):
        return self.metric, self.domain, self.region

    def __repr__(self):
        return f"ControlCase({self.name})"


def case_interval_window():
    # worst ray starts right of 0.6 heading right: T_gcc = 2 * 0.4
    return ControlCase(
        "interval_window",
        create_interval(),
        flat_metric(1),
        create_interval_region(0.3, 0.6),
        SamplingSpec(spacing=0.02),
    )


def case_interval_left_end():
    # worst ray starts at 0+ heading right: T_gcc = 2
    domain = create_interval()
    return ControlCase(
        "interval_left_end",
        domain,
        flat_metric(1),
        create_endpoint_region(domain, [0.0]),
        SamplingSpec(spacing=0.02),
    )


def case_square_strip():
    # vertical bouncing balls right of the strip never enter it
    return ControlCase(
        "square_strip",
        create_unit_square(),
        flat_metric(2),
        create_strip_region(0, hi=0.3),
        SamplingSpec(spacing=0.2, n_angles=8),
    )


def case_disc_boundary():
    # chords are at most 2 long
    domain = create_disc()
    return ControlCase(
        "disc_boundary",
        domain,
        flat_metric(2),
        create_full_boundary_region(domain),
        SamplingSpec(spacing=0.25, n_angles=8),
    )
