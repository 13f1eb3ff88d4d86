"""Eigenbases with closed-form Dirichlet spectra."""

from gcckit.geometry import create_disc, create_interval, create_unit_square, flat_metric
from gcckit.spectral import assemble_and_eig


def interval_basis(resolution=401, count=20, kappa=None):
    # lambda_nu = (nu pi)^2, e_nu = sqrt(2) sin(nu pi x)
    return assemble_and_eig(create_interval(), flat_metric(1, kappa), resolution, count)


def square_basis(resolution=41, count=6):
    # lambda = pi^2 (m^2 + n^2)
    return assemble_and_eig(create_unit_square(), flat_metric(2), resolution, count)


def disc_basis(resolution=41, count=3):
    # lambda = j_{0,1}^2, j_{1,1}^2 (twice)
    return assemble_and_eig(create_disc(), flat_metric(2), resolution, count)


J01_SQUARED = 5.783185962946784
J11_SQUARED = 14.681970642123893
