"""Observability constants from Hermitian Gram forms.

For a family of time-harmonic components ``u = sum_p s_p e^{i t f_p} e_{nu_p}``
the observed quantity ``int_I ||1_region O u||^2 dt`` is the Hermitian form

    G_pq = c_p conj(c_q) int_I e^{i t (f_p - f_q)} dt S_{nu_p nu_q}

where ``c_p`` is the amplitude of ``O`` on component ``p`` and ``S`` is the mode
overlap over the region (weighted nodes inside ``omega``, or boundary samples
of ``d_n e_nu`` over ``Gamma``). The time integrals are exact. The constant is
``1 / lambda_min(G)`` over the unit sphere of the coefficients.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from loguru import logger

from gcckit.control.regions import ObservationRegion
from gcckit.enums import Observation, RegionKind
from gcckit.errors import DenseSizeError, PreconditionError
from gcckit.spectral.assemble import EigenBasis
from gcckit.spectral.dyadic import DyadicSpec, dyadic_index_set
from gcckit.spectral.evolve import NormalDerivatives, mode_normal_derivatives
from gcckit.types import NDArray, Report, Sequence

DEFAULT_DELTA_FRACTION = 0.05
DEFAULT_MAX_DENSE = 2000
DEFAULT_SPREAD_BOUND = 3.0


@dataclass(frozen=True)
class ObservabilityConstant:
    """Result of a Gram eigenproblem.

    Attributes:
        k: Band index (None for spectral windows).
        h: Scale ``h_k`` (1 for windows).
        size: Number of components.
        lambda_min: Smallest eigenvalue of the Gram matrix.
        C: ``1 / lambda_min`` (``inf`` when the form degenerates).
        interval: Observation interval ``(delta, T - delta)``.
    """

    k: int | None
    h: float
    size: int
    lambda_min: float
    C: float
    interval: tuple[float, float]

    def to_dict(self) -> Report:
        return {
            "k": self.k,
            "h": self.h,
            "size": self.size,
            "lambda_min": self.lambda_min,
            "C": None if np.isinf(self.C) else self.C,
            "interval": list(self.interval),
        }


# ------------------------------------------------------------------------------
# Gram machinery
# ------------------------------------------------------------------------------


def time_integrals(frequencies: NDArray, interval: tuple[float, float]) -> NDArray:
    """``int_a^b e^{i t (f_p - f_q)} dt`` for all pairs."""
    a, b = interval
    w = frequencies[:, None] - frequencies[None, :]
    small = np.abs(w) < 1e-12
    safe = np.where(small, 1.0, w)
    exact = (np.exp(1j * safe * b) - np.exp(1j * safe * a)) / (1j * safe)
    return np.where(small, b - a, exact)


def region_overlap(
    basis: EigenBasis,
    region: ObservationRegion,
    indices: NDArray,
    *,
    derivatives: NormalDerivatives | None = None,
) -> NDArray:
    """Overlap matrix ``S`` of the selected modes over the region."""
    if region.kind == RegionKind.INTERIOR:
        inside = region.values(basis.interior_nodes) > 0
        modes = basis.modes[:, indices]
        return modes.T @ ((basis.weights * inside)[:, None] * modes)
    derivatives = derivatives or mode_normal_derivatives(basis)
    inside = region.values(derivatives.sigmas) > 0
    values = derivatives.values[:, indices]
    return values.T @ ((derivatives.weights * inside)[:, None] * values)


def _check_observation(region: ObservationRegion, observation: Observation) -> None:
    expected = RegionKind.INTERIOR if observation == Observation.TIME_DERIVATIVE else RegionKind.BOUNDARY
    if region.kind != expected:
        msg = f"observation {observation} needs a {expected} region, got {region.kind} region {region.name}"
        raise PreconditionError(msg)


def _interval(T: float, delta: float | None) -> tuple[float, float]:
    delta = DEFAULT_DELTA_FRACTION * T if delta is None else delta
    if not 0 <= delta < T / 2:
        msg = f"need 0 <= delta < T/2, got delta={delta}, T={T}"
        raise PreconditionError(msg)
    return delta, T - delta


def _smallest_eigenvalue(gram: NDArray, max_dense: int) -> float:
    if gram.shape[0] > max_dense:
        msg = (
            f"Gram matrix of size {gram.shape[0]} exceeds the dense limit {max_dense}; "
            "use a coarser band (smaller rho) or fewer modes"
        )
        raise DenseSizeError(msg)
    gram = 0.5 * (gram + gram.conj().T)
    return float(scipy.linalg.eigh(gram, eigvals_only=True, subset_by_index=[0, 0])[0])


def _constant(lambda_min: float, scale: float) -> float:
    # eigenvalues at round-off level of the largest entry mean the form is singular
    return np.inf if lambda_min <= 1e-13 * max(scale, 1.0) else 1.0 / lambda_min


# ------------------------------------------------------------------------------
# Constants
# ------------------------------------------------------------------------------


def obs_constant_dyadic(
    basis: EigenBasis,
    spec: DyadicSpec,
    k: int,
    region: ObservationRegion,
    T: float,
    *,
    observation: Observation | str | None = None,
    delta: float | None = None,
    max_dense: int = DEFAULT_MAX_DENSE,
    derivatives: NormalDerivatives | None = None,
) -> ObservabilityConstant:
    """Semiclassical observability constant of band ``k``.

    ``C(k)`` is the best constant in
    ``||u||^2 <= C int_I ||1_region h_k O u||^2 dt`` over one-sided packets
    ``u = sum_{nu in J_k} c_nu e^{sgn(k) i t w_nu} e_nu``, with ``O = d_t``
    (interior regions) or ``O = d_n`` (boundary regions) and
    ``I = (delta, T - delta)``.

    Raises:
        PreconditionError: If ``J_k`` is empty or the observation does not match
            the region kind.
        DenseSizeError: If ``|J_k| > max_dense``.
        SpectralBandError: If the band is not covered by the basis.
    """
    observation = Observation(observation or _default_observation(region))
    _check_observation(region, observation)
    interval = _interval(T, delta)
    indices = dyadic_index_set(spec, basis, k)
    if len(indices) == 0:
        msg = f"band k={k} is empty: no sqrt(lambda) in {spec.band(k)}"
        raise PreconditionError(msg)

    h = spec.h(k)
    omegas = np.sign(k or 1) * basis.sqrt_lambdas[indices]
    amplitudes = h * omegas if observation == Observation.TIME_DERIVATIVE else np.full(len(indices), h)
    overlap = region_overlap(basis, region, indices, derivatives=derivatives)
    gram = np.outer(amplitudes, amplitudes.conj()) * time_integrals(omegas, interval) * overlap
    lambda_min = _smallest_eigenvalue(gram, max_dense)
    result = ObservabilityConstant(
        k, h, len(indices), lambda_min, _constant(lambda_min, np.abs(gram).max()), interval
    )
    logger.debug(f"C(k={k}) = {result.C:.6g} over {len(indices)} modes")
    return result


def obs_constant_window(
    basis: EigenBasis,
    indices: Sequence[int],
    region: ObservationRegion,
    T: float,
    *,
    observation: Observation | str | None = None,
    delta: float | None = None,
    max_dense: int = DEFAULT_MAX_DENSE,
    derivatives: NormalDerivatives | None = None,
) -> ObservabilityConstant:
    """Classical observability constant of real data in a spectral window.

    Best ``C`` in ``E(u) <= C int_I ||1_region O u||^2 dt`` for solutions with
    data in ``span{e_nu : nu in indices}``. Both time orientations enter with the
    energy-normalised amplitudes ``s_+ = w a``, ``s_- = w b``, so that
    ``E = sum |s|^2``.
    """
    observation = Observation(observation or _default_observation(region))
    _check_observation(region, observation)
    interval = _interval(T, delta)
    indices = np.asarray(indices, dtype=int)
    if len(indices) == 0:
        msg = "empty spectral window"
        raise PreconditionError(msg)

    omegas = basis.sqrt_lambdas[indices]
    frequencies = np.concatenate([omegas, -omegas])
    if observation == Observation.TIME_DERIVATIVE:
        amplitudes = np.concatenate([np.full(len(indices), 1j), np.full(len(indices), -1j)])
    else:
        amplitudes = np.concatenate([1.0 / omegas, 1.0 / omegas]).astype(complex)
    overlap = region_overlap(basis, region, indices, derivatives=derivatives)
    overlap = np.block([[overlap, overlap], [overlap, overlap]])
    gram = np.outer(amplitudes, amplitudes.conj()) * time_integrals(frequencies, interval) * overlap
    lambda_min = _smallest_eigenvalue(gram, max_dense)
    return ObservabilityConstant(
        None, 1.0, len(frequencies), lambda_min, _constant(lambda_min, np.abs(gram).max()), interval
    )


def _default_observation(region: ObservationRegion) -> Observation:
    if region.kind == RegionKind.INTERIOR:
        return Observation.TIME_DERIVATIVE
    return Observation.NORMAL_DERIVATIVE


# ------------------------------------------------------------------------------
# Sweeps and exports
# ------------------------------------------------------------------------------


def observability_sweep(
    basis: EigenBasis,
    spec: DyadicSpec,
    region: ObservationRegion,
    T: float,
    ks: Sequence[int],
    **kwargs,
) -> list[Report]:
    """Rows ``{k, h_k, size, C}`` over bands; empty bands get ``size = 0`` and no constant."""
    derivatives = None
    if region.kind == RegionKind.BOUNDARY:
        derivatives = mode_normal_derivatives(basis)
    rows = []
    for k in ks:
        if len(dyadic_index_set(spec, basis, k)) == 0:
            rows.append({"k": k, "h": spec.h(k), "size": 0, "C": None, "lambda_min": None})
            continue
        result = obs_constant_dyadic(basis, spec, k, region, T, derivatives=derivatives, **kwargs)
        rows.append({
            "k": k,
            "h": result.h,
            "size": result.size,
            "C": None if np.isinf(result.C) else result.C,
            "lambda_min": result.lambda_min,
        })
    finite = [row["C"] for row in rows if row["C"] is not None]
    if finite:
        logger.info(f"Observability over {len(rows)} bands of {region.name}: max C(k) = {max(finite):.6g}")
    if any(row["size"] and row["C"] is None for row in rows):
        logger.warning(f"Observation of {region.name} degenerates on some band")
    return rows


def sweep_trend(rows: Sequence[Report], bound: float = DEFAULT_SPREAD_BOUND) -> Report:
    """Spread ``max C / min C`` and growth ``C(k_last) / C(k_first)`` over the non-empty bands.

    A degenerate band (``C = inf``) makes both ratios infinite. ``bounded`` holds
    when the spread is at most ``bound``; it describes the swept bands only.
    """
    constants = [np.inf if row["C"] is None else float(row["C"]) for row in rows if row["size"]]
    if not constants:
        return {"ks": [], "spread": None, "growth": None, "bounded": None}
    spread = max(constants) / min(constants)
    growth = constants[-1] / constants[0]
    ks = [row["k"] for row in rows if row["size"]]
    logger.info(f"C(k) over k={ks[0]}..{ks[-1]}: spread {spread:.4g}, growth {growth:.4g}")
    return {"ks": ks, "spread": spread, "growth": growth, "bounded": bool(spread <= bound)}


def spectrum_rows(basis: EigenBasis) -> list[Report]:
    """``(nu, lambda_nu)`` rows with 1-based ``nu``."""
    return [{"nu": i + 1, "lambda": float(lam)} for i, lam in enumerate(basis.lambdas)]
