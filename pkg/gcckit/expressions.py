"""Tiny arithmetic-expression grammar for metrics, level sets and symbols.

Expressions use the identifiers of their context (``x1, x2`` for fields on the
domain, plus ``xi1, xi2`` for phase-space symbols and ``t, z, tau, zeta`` for
space-time symbols), the operators ``+ - * / ^`` and the functions ``sin``,
``cos``, ``exp`` and ``sqrt``. Parsing is done by sympy and the result is
lambdified to ``jax.numpy`` so it can be differentiated and jitted.
"""

import functools

import jax.numpy as jnp
import sympy
from sympy.parsing.sympy_parser import (
    convert_xor,
    parse_expr,
    standard_transformations,
)

from gcckit.errors import ConfigurationError
from gcckit.types import Array, Callable, Sequence

ALLOWED_FUNCTIONS = {"sin": sympy.sin, "cos": sympy.cos, "exp": sympy.exp}
ALLOWED_CONSTANTS = {"pi": sympy.pi}

SPATIAL_VARIABLES = ("x1", "x2")
PHASE_VARIABLES = ("x1", "x2", "xi1", "xi2")
SPACETIME_VARIABLES = ("t", "z", "tau", "zeta")

_TRANSFORMATIONS = (*standard_transformations, convert_xor)


def parse_expression(
    text: str,
    variables: Sequence[str],
    *,
    key: str = "expression",
    allow_complex: bool = False,
) -> sympy.Expr:
    """Parse and validate an expression against the grammar.

    Args:
        text: The expression source.
        variables: Identifiers allowed in this context.
        key: Configuration key reported in error messages.
        allow_complex: Whether the imaginary unit ``I`` may appear.

    Returns:
        The sympy expression.

    Raises:
        ConfigurationError: If the text does not parse or uses identifiers,
            functions or constants outside the grammar.
    """
    if "__" in text or ";" in text:
        msg = f"{key}: forbidden characters in expression {text!r}"
        raise ConfigurationError(msg)

    local_dict = {name: sympy.Symbol(name, real=True) for name in variables}
    local_dict.update(ALLOWED_FUNCTIONS)
    local_dict["sqrt"] = sympy.sqrt
    local_dict.update(ALLOWED_CONSTANTS)
    if allow_complex:
        local_dict["I"] = sympy.I

    try:
        expr = parse_expr(
            text, local_dict=local_dict, transformations=_TRANSFORMATIONS
        )
    except (SyntaxError, TypeError, ValueError, sympy.SympifyError) as error:
        msg = f"{key}: cannot parse {text!r} ({error})"
        raise ConfigurationError(msg) from error

    if not isinstance(expr, sympy.Expr):
        msg = f"{key}: {text!r} is not an arithmetic expression"
        raise ConfigurationError(msg)

    unknown = {str(s) for s in expr.free_symbols} - set(variables)
    if unknown:
        msg = (
            f"{key}: unknown identifier(s) {sorted(unknown)} in {text!r}; "
            f"allowed: {list(variables)}"
        )
        raise ConfigurationError(msg)

    allowed_heads = {*ALLOWED_FUNCTIONS.values()}
    bad_functions = {
        type(f).__name__ for f in expr.atoms(sympy.Function) if f.func not in allowed_heads
    }
    if bad_functions:
        msg = f"{key}: unsupported function(s) {sorted(bad_functions)} in {text!r}"
        raise ConfigurationError(msg)

    bad_constants = {
        str(c) for c in expr.atoms(sympy.NumberSymbol) if c not in ALLOWED_CONSTANTS.values()
    }
    if bad_constants:
        msg = f"{key}: unsupported constant(s) {sorted(bad_constants)} in {text!r}"
        raise ConfigurationError(msg)

    if not allow_complex and expr.has(sympy.I):
        msg = f"{key}: complex values are not allowed in {text!r}"
        raise ConfigurationError(msg)

    return expr


def compile_expression(
    text: str,
    variables: Sequence[str],
    *,
    key: str = "expression",
    allow_complex: bool = False,
) -> Callable[..., Array]:
    """Compile an expression into a broadcasting jax function of its variables.

    Args:
        text: The expression source.
        variables: Positional argument names of the compiled function.
        key: Configuration key reported in error messages.
        allow_complex: Whether the imaginary unit ``I`` may appear.

    Returns:
        A function ``f(*arrays)`` returning an array broadcast to the common shape
        of its arguments.
    """
    expr = parse_expression(text, variables, key=key, allow_complex=allow_complex)
    symbols = [sympy.Symbol(name, real=True) for name in variables]
    raw = sympy.lambdify(symbols, expr, modules="jax")

    def compiled(*args: Array) -> Array:
        shape = jnp.broadcast_shapes(*(jnp.shape(a) for a in args))
        return jnp.broadcast_to(jnp.asarray(raw(*args)), shape)

    compiled.__doc__ = f"Compiled expression {text!r} in {tuple(variables)}."
    return compiled


def spatial_field(text: str, dim: int, *, key: str = "expression") -> Callable:
    """Compile an expression in ``x1, ..., xd`` to a function of points.

    Returns:
        A function mapping points of shape ``(..., dim)`` to values of shape
        ``(...)``.
    """
    names = SPATIAL_VARIABLES[:dim]
    fn = compile_expression(text, names, key=key)

    def field(x: Array) -> Array:
        x = jnp.asarray(x)
        return fn(*(x[..., i] for i in range(dim)))

    return field


def phase_symbol(text: str, dim: int, *, key: str = "symbol") -> Callable:
    """Compile an expression in ``x1.., xi1..`` to a symbol ``(x, xi) -> value``."""
    names = (*SPATIAL_VARIABLES[:dim], *("xi1", "xi2")[:dim])
    fn = compile_expression(text, names, key=key, allow_complex=True)

    def symbol(x: Array, xi: Array) -> Array:
        x, xi = jnp.asarray(x), jnp.asarray(xi)
        return fn(*(x[..., i] for i in range(dim)), *(xi[..., i] for i in range(dim)))

    return symbol


@functools.cache
def constant_field(value: float) -> Callable:
    """A spatial field that ignores its argument."""

    def field(x: Array) -> Array:
        return jnp.full(jnp.shape(x)[:-1], value)

    return field
