"""Packet ladders, exact reflections and space-time test symbols."""

import functools

import jax.numpy as jnp
import numpy as np

from gcckit.geometry import create_interval, flat_metric
from gcckit.measures import create_packet, half_line_reflection
from gcckit.semiclassical import create_grid, create_symbol, required_size, smooth_bump
from gcckit.spectral import assemble_and_eig

X0 = np.pi
XI0 = 1.0


def packet_grid(h, length=2 * np.pi, lo=0.0, radius=2.0):
    return create_grid(1, max(required_size(radius, h, length), 64), lo, lo + length)


def packet_ladder(hs, x0=X0, xi0=XI0):
    return [create_packet(packet_grid(h), [x0], [xi0], h) for h in hs]


@functools.cache
def fine_interval_basis():
    # frequencies up to about 500
    return assemble_and_eig(create_interval(), flat_metric(1), 1601, 160)


# ------------------------------------------------------------------------------
# Space-time symbols a(t, x, tau, xi)
# ------------------------------------------------------------------------------


def _t(x):
    return x[..., 0]


def _x(x):
    return x[..., 1]


def case_moving_bump():
    """Compact in (t, x), supported near xi = 1."""

    def symbol(x, xi):
        return (
            smooth_bump((_t(x) - 1.0) / 0.9)
            * smooth_bump((_x(x) - np.pi) / 1.8)
            * smooth_bump((xi[..., 1] - 1.0) / 0.5)
        )

    return create_symbol(symbol, 2, name="moving bump", xi_radius=2.5)


def case_time_cutoff():
    """Only a time cutoff and a frequency cutoff: ``H_p a`` pairs with a conserved quantity."""

    def symbol(x, xi):
        return smooth_bump((_t(x) - 1.0) / 0.9) * smooth_bump((xi[..., 1] - 1.0) / 0.5) + 0.0 * _x(x)

    return create_symbol(symbol, 2, name="time cutoff", xi_radius=2.5)


def case_no_time_cutoff():
    def symbol(x, xi):
        return smooth_bump((_x(x) - np.pi) / 1.8) * smooth_bump((xi[..., 1] - 1.0) / 0.5) + 0.0 * _t(x)

    return create_symbol(symbol, 2, name="no time cutoff", xi_radius=2.5)


def shifted(symbol, dt):
    def moved(x, xi):
        return symbol.fn(x - jnp.asarray([dt, 0.0]), xi)

    return create_symbol(moved, 2, name=f"{symbol.name} + {dt}", xi_radius=symbol.xi_radius)


# ------------------------------------------------------------------------------
# Half-line reflection
# ------------------------------------------------------------------------------

Z0 = 3.0
IMPACT = Z0


def reflection(h):
    space = create_grid(1, 512, -4.0, 4.0)
    time = create_grid(1, 256, 0.0, 2 * Z0)
    return half_line_reflection(space, time, h, Z0)


def _boundary_symbol(zeta_factor, t_center=IMPACT, t_radius=2.5, z_center=0.0, z_radius=2.5, name=""):
    def symbol(x, xi):
        return (
            smooth_bump((_t(x) - t_center) / t_radius)
            * smooth_bump((_x(x) - z_center) / z_radius)
            * smooth_bump((xi[..., 0] - 1.0) / 0.5)
            * zeta_factor(xi[..., 1])
            * smooth_bump(xi[..., 1] / 2.0)
        )

    return create_symbol(symbol, 2, name=name, xi_radius=2.5)


def case_odd_in_zeta():
    # a(zeta+) - a(zeta-) = 2 exp(-1/3) at tau = 1
    return _boundary_symbol(lambda zeta: zeta, name="odd")


def case_even_in_zeta():
    return _boundary_symbol(lambda zeta: zeta**2, name="even")


def case_before_impact():
    return _boundary_symbol(lambda zeta: zeta, t_center=1.0, t_radius=0.8, z_center=2.0, z_radius=0.9, name="early")
