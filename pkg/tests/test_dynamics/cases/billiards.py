"""Domains with metrics and collar charts shared by the dynamics tests."""

import jax.numpy as jnp

from gcckit.geometry import (
    build_collar_chart,
    conformal_metric,
    create_disc,
    create_half_plane,
    create_interval,
    create_unit_square,
    flat_metric,
)


class BilliardCase:
    """A domain, a metric on it and the collar chart of the pair."""

    def __init__(self, name, domain, metric, width=None):
        self.name = name
        self.domain = domain
        self.metric = metric
        self.chart = build_collar_chart(domain, metric, width)

    @property
    def dim(self):
        return self.domain.dim

    def __repr__(self):
        return f"BilliardCase({self.name})"


def speed_slower_inside(x):
    return 1.0 - 0.5 * x[..., 1]


def speed_faster_inside(x):
    return 1.0 + 0.5 * x[..., 1]


def speed_radial(x):
    return 1.0 + 0.3 * jnp.sum(x**2, axis=-1)


def case_interval():
    return BilliardCase("interval", create_interval(), flat_metric(1))


def case_square():
    return BilliardCase("square", create_unit_square(), flat_metric(2))


def case_disc():
    return BilliardCase("disc", create_disc(), flat_metric(2))


def case_disc_radial():
    return BilliardCase("disc_radial", create_disc(), conformal_metric(speed_radial, 2))


def case_half_plane_diffractive():
    return BilliardCase(
        "half_plane_diffractive",
        create_half_plane(),
        conformal_metric(speed_slower_inside, 2),
        0.1,
    )


def case_half_plane_gliding():
    return BilliardCase(
        "half_plane_gliding",
        create_half_plane(),
        conformal_metric(speed_faster_inside, 2),
        0.1,
    )
