"""Semiclassical measure estimates from ``h``-indexed sequences.

Pairings ``<Op^h(a) u_h, u_h>`` are evaluated along a ladder of ``h`` values
and extrapolated to ``h = 0``. The limits are the values of the measure on the
test symbols.
"""

import warnings
from dataclasses import dataclass

import jax.numpy as jnp
import numpy as np
import scipy.linalg
from loguru import logger

from gcckit.errors import ConfigurationError, PreconditionError
from gcckit.measures.packets import LadderSample, LeakReport, mass_leak
from gcckit.semiclassical.quantize import quantize
from gcckit.semiclassical.symbols import Symbol
from gcckit.spectral.assemble import EigenBasis
from gcckit.types import Callable, Mapping, NDArray, Report, Sequence
from gcckit.util.mv import hermitian_defect
from gcckit.util.ops import parallel_map

# ------------------------------------------------------------------------------
# Default values
# ------------------------------------------------------------------------------

DEFAULT_MASS_TOLERANCE = 0.05
DEFAULT_COVERAGE = 0.999
CAUCHY_SCHWARZ_FLOOR = 1e-12

SymbolBank = Mapping[str, Symbol] | Sequence[Symbol]


def _named_bank(bank: SymbolBank) -> dict[str, Symbol]:
    if isinstance(bank, Mapping):
        return dict(bank)
    named = {}
    for i, symbol in enumerate(bank):
        named[symbol.name or f"a{i}"] = symbol
    if len(named) != len(bank):
        msg = "symbol names in a bank must be unique"
        raise ConfigurationError(msg)
    return named


def _ordered(sequence: Sequence[LadderSample]) -> list[LadderSample]:
    if not sequence:
        msg = "a measure estimate needs at least one sequence member"
        raise PreconditionError(msg)
    return sorted(sequence, key=lambda sample: -sample.h)


def extrapolate(hs: Sequence[float], values: Sequence[complex]) -> tuple[complex, float]:
    """Richardson limit from the two finest rungs, assuming an ``O(h)`` error.

    Returns:
        ``(limit, spread)`` with ``spread`` the difference of the two finest values.
    """
    if len(hs) < 2:
        return complex(values[-1]), np.inf
    h1, h2 = hs[-2], hs[-1]
    v1, v2 = complex(values[-2]), complex(values[-1])
    return (h1 * v2 - h2 * v1) / (h1 - h2), abs(v2 - v1)


def pairing(symbol: Symbol, sample: LadderSample, other: LadderSample | None = None, **kwargs) -> complex:
    """``<Op^h(a) u_h, w_h>`` (``w_h = u_h`` by default)."""
    op = quantize(symbol, sample.h, sample.grid, **kwargs)
    target = sample.values if other is None else other.values
    return complex(sample.grid.inner(op(sample.values), target))


# ------------------------------------------------------------------------------
# Scalar sequences
# ------------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MeasureEstimate:
    """Pairings of a sequence with a symbol bank along an ``h`` ladder.

    Attributes:
        names: Symbol names, in bank order.
        hs: Ladder values, decreasing.
        pairings: ``(n_symbols, n_h)`` complex pairings.
        masses: ``||u_h||^2`` per rung.
        limits: Extrapolated pairings per symbol.
        spreads: Last-two-rung spreads per symbol.
        leaks: Leak reports per rung.
        mass_defect: Relative gap between the summed finest pairings and the
            finest mass, when the bank is a partition of unity and no leak was
            flagged; None otherwise.
        mass_tolerance: Tolerance the mass defect is judged against.
    """

    names: tuple[str, ...]
    hs: NDArray
    pairings: NDArray
    masses: NDArray
    limits: NDArray
    spreads: NDArray
    leaks: tuple[LeakReport, ...]
    mass_defect: float | None
    mass_tolerance: float = DEFAULT_MASS_TOLERANCE

    @property
    def leaked(self) -> bool:
        return any(leak.leaked for leak in self.leaks[-2:])

    @property
    def mass_conserved(self) -> bool | None:
        if self.mass_defect is None:
            return None
        return self.mass_defect <= self.mass_tolerance

    def pairing(self, name: str) -> complex:
        """Pairing with symbol ``name`` at the finest ``h``."""
        return complex(self.pairings[self.names.index(name), -1])

    def limit(self, name: str) -> complex:
        return complex(self.limits[self.names.index(name)])

    def to_dict(self) -> Report:
        return {
            "h": self.hs.tolist(),
            "mass": self.masses.tolist(),
            "leaks": [leak.to_dict() for leak in self.leaks],
            "leaked": self.leaked,
            "mass_defect": self.mass_defect,
            "mass_conserved": self.mass_conserved,
            "symbols": {
                name: {
                    "pairings": [[float(v.real), float(v.imag)] for v in self.pairings[i]],
                    "limit": [float(self.limits[i].real), float(self.limits[i].imag)],
                    "spread": float(self.spreads[i]),
                }
                for i, name in enumerate(self.names)
            },
        }


def estimate_measure(
    sequence: Sequence[LadderSample],
    bank: SymbolBank,
    *,
    partition_of_unity: bool = False,
    mass_tolerance: float = DEFAULT_MASS_TOLERANCE,
    jobs: int | None = None,
    **kwargs,
) -> MeasureEstimate:
    """Estimate the semiclassical measure of a sequence on a symbol bank.

    Args:
        sequence: Members ``u_h`` (any order; sorted by decreasing ``h``).
        bank: Test symbols, named by mapping key or symbol name.
        partition_of_unity: Whether the bank sums to 1, in which case the
            summed pairings are compared with the mass.
        mass_tolerance: Relative tolerance of that comparison.
        jobs: Workers for pairing the bank in parallel.
        **kwargs: Additional options:
            - quantize_batch_size: Forwarded to `quantize`.
            - leak_tolerance: Leak threshold (see `mass_leak`).

    Returns:
        The measure estimate. A flagged leak disables the mass comparison.
    """
    samples = _ordered(sequence)
    named = _named_bank(bank)
    names = tuple(named)
    hs = np.array([sample.h for sample in samples])
    leak_kwargs = {"tol": kwargs.pop("leak_tolerance")} if "leak_tolerance" in kwargs else {}

    def pair_row(name):
        return [pairing(named[name], sample, **kwargs) for sample in samples]

    pairings = np.array(parallel_map(pair_row, names, jobs=jobs), dtype=complex).reshape(len(names), len(samples))
    masses = np.array([sample.mass for sample in samples])
    extrapolated = [extrapolate(hs, row) for row in pairings]
    leaks = tuple(mass_leak(sample, **leak_kwargs) for sample in samples)

    mass_defect = None
    if partition_of_unity:
        if any(leak.leaked for leak in leaks[-2:]):
            msg = "mass leak at infinity flagged: mass conservation is not checked"
            logger.warning(msg)
            warnings.warn(msg, stacklevel=2)
        else:
            total = float(np.sum(pairings[:, -1].real))
            mass_defect = abs(total - masses[-1]) / masses[-1]

    estimate = MeasureEstimate(
        names,
        hs,
        pairings,
        masses,
        np.array([limit for limit, _ in extrapolated]),
        np.array([spread for _, spread in extrapolated]),
        leaks,
        mass_defect,
        mass_tolerance,
    )
    logger.info(f"Estimated {len(names)} pairings over h = {hs.tolist()}; leak: {estimate.leaked}")
    return estimate


# ------------------------------------------------------------------------------
# Vector sequences
# ------------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class HermitianMeasureEstimate:
    """2x2 blocks ``B[i, j] = <Op^h(a) u_i, u_j>`` of a pair of sequences.

    Attributes:
        names: Symbol names.
        hs: Ladder values, decreasing.
        blocks: ``(n_symbols, n_h, 2, 2)`` complex blocks.
    """

    names: tuple[str, ...]
    hs: NDArray
    blocks: NDArray

    def block(self, name: str) -> NDArray:
        """Block of symbol ``name`` at the finest ``h``."""
        return self.blocks[self.names.index(name), -1]

    @property
    def hermitian_defect(self) -> float:
        """Relative anti-Hermitian part of the finest blocks, taken together."""
        return float(hermitian_defect(jnp.asarray(scipy.linalg.block_diag(*self.blocks[:, -1]))))

    def to_dict(self) -> Report:
        return {
            "h": self.hs.tolist(),
            "hermitian_defect": self.hermitian_defect,
            "blocks": {
                name: [[[float(v.real), float(v.imag)] for v in row] for row in self.block(name)]
                for name in self.names
            },
        }


def estimate_hermitian(
    pairs: Sequence[tuple[LadderSample, LadderSample]], bank: SymbolBank, *, jobs: int | None = None, **kwargs
) -> HermitianMeasureEstimate:
    """Hermitian measure blocks of a vector sequence ``(u_h, w_h)``.

    Both members of a pair must share ``h`` and the grid.
    """
    for first, second in pairs:
        if first.h != second.h or first.grid != second.grid:
            msg = "both members of a vector sequence need the same h and grid"
            raise PreconditionError(msg)
    ordered = sorted(pairs, key=lambda pair: -pair[0].h)
    if not ordered:
        msg = "a measure estimate needs at least one sequence member"
        raise PreconditionError(msg)
    named = _named_bank(bank)
    names = tuple(named)

    def blocks_of(name):
        return [
            [[pairing(named[name], pair[i], pair[j], **kwargs) for j in range(2)] for i in range(2)]
            for pair in ordered
        ]

    blocks = np.array(parallel_map(blocks_of, names, jobs=jobs), dtype=complex)
    return HermitianMeasureEstimate(names, np.array([pair[0].h for pair in ordered]), blocks)


def cauchy_schwarz_defect(estimate: HermitianMeasureEstimate, name: str, abs_name: str) -> float:
    """``max(0, |B01(a)|^2 - B00(|a|) B11(|a|))`` relative to ``B00(|a|) B11(|a|)``.

    Args:
        estimate: Hermitian estimate containing both symbols.
        name: The symbol ``a``.
        abs_name: A symbol equal to ``|a|``.
    """
    off = abs(estimate.block(name)[0, 1]) ** 2
    diag = estimate.block(abs_name)
    product = float(diag[0, 0].real * diag[1, 1].real)
    return max(0.0, off - product) / max(abs(product), CAUCHY_SCHWARZ_FLOOR)


# ------------------------------------------------------------------------------
# Functional calculus
# ------------------------------------------------------------------------------


def dyadic_project(
    basis: EigenBasis,
    chi: Callable[[NDArray], NDArray],
    h: float,
    v: NDArray,
    *,
    coverage: float = DEFAULT_COVERAGE,
) -> NDArray:
    """``chi(h^2 A) v = sum_nu chi(h^2 lambda_nu) <v, e_nu> e_nu`` on the interior nodes.

    Args:
        basis: Eigenbasis of ``A``.
        chi: Band function of ``h^2 lambda``.
        h: Semiclassical parameter.
        v: Interior grid function.
        coverage: Share of ``||v||^2`` the computed modes must capture before a
            warning is raised.

    Returns:
        The projected interior grid function.
    """
    v = np.asarray(v)
    coefficients = basis.expand(v)
    total = basis.norm(v) ** 2
    captured = float(np.sum(np.abs(coefficients) ** 2))
    if total > 0 and captured < coverage * total:
        msg = f"the computed modes capture {captured / total:.4%} of ||v||^2; the projection is truncated"
        logger.warning(msg)
        warnings.warn(msg, stacklevel=2)
    weights = np.asarray(chi(h**2 * basis.lambdas))
    return basis.synthesize(weights * coefficients)
