"""Semiclassical quantization on grids, norm probes and symbol division."""

from .division import DivisionResult, euclidean_divide, quadratic_coefficients
from .grid import PeriodicGrid, check_band, create_grid, grid_for_symbol, required_size
from .norms import (
    DecayTable,
    KernelReport,
    NormProbe,
    commutator_decay,
    corrected_commutator,
    kernel_and_schur,
    operator_norm,
)
from .quantize import (
    GridOperator,
    commutator,
    compose,
    fourier_multiplier,
    linear_combination,
    multiplication_operator,
    quantize,
    quantize_family,
    quantize_samples,
    tangential_quantize,
)
from .symbols import (
    Symbol,
    create_symbol,
    decay_norm,
    load_symbol_bank,
    phase_bump,
    smooth_bump,
    symbol_from_expression,
)

__all__ = [
    "DecayTable",
    "DivisionResult",
    "GridOperator",
    "KernelReport",
    "NormProbe",
    "PeriodicGrid",
    "Symbol",
    "check_band",
    "commutator",
    "commutator_decay",
    "compose",
    "corrected_commutator",
    "create_grid",
    "create_symbol",
    "decay_norm",
    "euclidean_divide",
    "fourier_multiplier",
    "grid_for_symbol",
    "kernel_and_schur",
    "linear_combination",
    "load_symbol_bank",
    "multiplication_operator",
    "operator_norm",
    "phase_bump",
    "quadratic_coefficients",
    "quantize",
    "quantize_family",
    "quantize_samples",
    "required_size",
    "smooth_bump",
    "symbol_from_expression",
    "tangential_quantize",
]
