"""Exceptions raised across gcckit.

Every error derives from `GccKitError` and from the builtin a caller would
naturally catch for it.
"""

from gcckit.types import Any


class GccKitError(Exception):
    """Base class of all gcckit errors."""


class DomainError(GccKitError, ValueError):
    """A point lies outside the closure of the domain, or the domain is unusable."""


class ConfigurationError(GccKitError, ValueError):
    """A configuration value, expression or oracle is missing or malformed."""


class CollarTooWideError(GccKitError, ValueError):
    """The collar chart Jacobian degenerates inside the requested width."""


class PreconditionError(GccKitError, ValueError):
    """An operation was called outside its documented preconditions."""


class ClassificationError(GccKitError, ValueError):
    """A boundary law was applied to a point of the wrong boundary class."""


class IntegrationError(GccKitError, RuntimeError):
    """The ray integrator could not continue.

    Attributes:
        partial: Whatever was integrated before the failure (a segment or None).
    """

    def __init__(self, msg: str, partial: Any = None):
        super().__init__(msg)
        self.partial = partial


class SpectralBandError(GccKitError, ValueError):
    """A spectral request falls outside the trustworthy part of the spectrum.

    Attributes:
        admissible: Largest admissible eigenpair count, if known.
    """

    def __init__(self, msg: str, admissible: int | None = None):
        super().__init__(msg)
        self.admissible = admissible


class DenseSizeError(GccKitError, ValueError):
    """A dense eigenproblem exceeds the configured size limit."""


class AliasingError(GccKitError, ValueError):
    """A symbol at scale h does not fit in the grid band.

    Attributes:
        required_size: Smallest power-of-two grid size per axis that fits.
    """

    def __init__(self, msg: str, required_size: int | None = None):
        super().__init__(msg)
        self.required_size = required_size


class UnsupportedSymbolError(GccKitError, ValueError):
    """The symbol is outside the class an operation supports."""


class PerturbationError(GccKitError, RuntimeError):
    """Random perturbations kept violating positivity within the retry budget."""
