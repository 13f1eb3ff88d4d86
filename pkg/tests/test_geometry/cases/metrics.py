"""Metric fields used across the geometry and dynamics tests."""

import jax.numpy as jnp

from gcckit.enums import Regularity
from gcckit.geometry import conformal_metric, create_metric, flat_metric


class MetricCase:
    """A named metric with the dimension it lives in."""

    def __init__(self, name, metric, *, analytic=True):
        self.name = name
        self.metric = metric
        self.analytic = analytic

    @property
    def dim(self):
        return self.metric.dim

    def __repr__(self):
        return f"MetricCase({self.name})"


def speed_radial(x):
    return 1.0 + 0.3 * jnp.sum(x**2, axis=-1)


def speed_linear(x):
    return 1.0 + x[..., 0]


def matrix_field(x):
    a = 2.0 + jnp.sin(x[0])
    b = 0.3 * jnp.cos(x[1])
    return jnp.array([[a, b], [b, 1.5 + 0.5 * x[0] ** 2]])


def case_flat():
    return MetricCase("flat", flat_metric(2))


def case_conformal_radial():
    return MetricCase("conformal_radial", conformal_metric(speed_radial, 2))


def case_conformal_fd():
    return MetricCase(
        "conformal_fd",
        conformal_metric(
            speed_radial, 2, derivative="fd", regularity=Regularity.LIPSCHITZ
        ),
        analytic=False,
    )


def case_matrix():
    return MetricCase("matrix", create_metric(matrix_field, 2))
