"""Dyadic frequency bands ``J_k = {nu : alpha <= h_k sqrt(lambda_nu) < 1 / alpha}``."""

from dataclasses import dataclass

import numpy as np

from gcckit.errors import ConfigurationError, SpectralBandError
from gcckit.spectral.assemble import EigenBasis
from gcckit.types import NDArray

DEFAULT_ALPHA = 0.5
DEFAULT_RHO = 1.5
DEFAULT_MIN_BAND_SIZE = 6


@dataclass(frozen=True)
class DyadicSpec:
    """Band parameters: ``h_k = rho^{-|k|}`` with ``0 < alpha < 1 < rho < 1 / alpha``.

    The last inequality makes consecutive bands overlap, so every mode above
    ``alpha`` lies in some band.
    """

    alpha: float = DEFAULT_ALPHA
    rho: float = DEFAULT_RHO

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            msg = f"dyadic.alpha must lie in (0, 1), got {self.alpha}"
            raise ConfigurationError(msg)
        if not 1.0 < self.rho < 1.0 / self.alpha:
            msg = f"dyadic.rho must lie in (1, 1/alpha) = (1, {1.0 / self.alpha:.6g}), got {self.rho}"
            raise ConfigurationError(msg)

    def h(self, k: int) -> float:
        return float(self.rho ** (-abs(k)))

    def band(self, k: int) -> tuple[float, float]:
        """Frequency window ``[alpha / h_k, 1 / (alpha h_k))`` of ``sqrt(lambda)``."""
        h = self.h(k)
        return self.alpha / h, 1.0 / (self.alpha * h)

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "rho": self.rho}


def dyadic_index_set(spec: DyadicSpec, basis: EigenBasis, k: int) -> NDArray:
    """0-based indices into ``basis.lambdas`` of the modes in band ``k``.

    Raises:
        SpectralBandError: If the band reaches beyond the computed spectrum, in
            which case uncomputed modes would belong to it.
    """
    low, high = spec.band(k)
    omegas = basis.sqrt_lambdas
    if omegas[-1] < high:
        msg = (
            f"band k={k} reaches sqrt(lambda)={high:.4g} but only {basis.count} modes "
            f"(sqrt(lambda) <= {omegas[-1]:.4g}) were computed"
        )
        raise SpectralBandError(msg, admissible=basis.count)
    return np.flatnonzero((omegas >= low) & (omegas < high))


def covered_bands(spec: DyadicSpec, basis: EigenBasis, k_max: int = 64, min_size: int = 1) -> list[int]:
    """Non-negative ``k`` whose band holds at least ``min_size`` modes and lies inside the computed spectrum.

    Bands with only a few modes have not reached the semiclassical regime, so
    sweeps that compare ``C(k)`` across bands pass ``min_size > 1``.
    """
    if min_size < 1:
        msg = f"min_size must be at least 1, got {min_size}"
        raise ConfigurationError(msg)
    ks = []
    for k in range(k_max + 1):
        low, high = spec.band(k)
        if basis.sqrt_lambdas[-1] < high:
            break
        if np.count_nonzero((basis.sqrt_lambdas >= low) & (basis.sqrt_lambdas < high)) >= min_size:
            ks.append(k)
    return ks
