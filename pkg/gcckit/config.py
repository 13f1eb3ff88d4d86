"""Experiment configuration files.

A configuration is a TOML document with one table per concern::

    [domain]
    kind = "interval"

    [metric]
    kind = "conformal"
    speed = "1 + 0.2 * sin(x1)"

    [region]
    shape = "interval"
    a = 0.3
    b = 0.6

Every table is validated by a pydantic model that rejects unknown keys.
Validation failures are reported as `ConfigurationError` naming the dotted key
and, when it can be found, the line of the key in the file.
"""

import tomllib
from pathlib import Path
from typing import Literal

import jax.numpy as jnp
import pydantic
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, model_validator

from gcckit.control.regions import ObservationRegion, create_region
from gcckit.control.sampling import (
    DEFAULT_ANGLES,
    DEFAULT_MARGIN,
    DEFAULT_REFINE_FACTOR,
    DEFAULT_SPACING,
    SamplingSpec,
)
from gcckit.dynamics.generalized import BranchPolicy
from gcckit.enums import (
    DomainKind,
    GccMode,
    GlancingRule,
    MetricKind,
    Observation,
    PerturbationMode,
    Regularity,
    SolverKind,
)
from gcckit.errors import ConfigurationError
from gcckit.expressions import compile_expression, spatial_field
from gcckit.geometry.domain import Domain, create_domain
from gcckit.geometry.metric import (
    DEFAULT_TOLERANCES,
    MetricField,
    Tolerances,
    conformal_metric,
    create_metric,
    flat_metric,
)
from gcckit.geometry.perturb import lipschitz_perturb
from gcckit.spectral.assemble import DEFAULT_BAND_SAFETY
from gcckit.spectral.dyadic import DEFAULT_ALPHA, DEFAULT_MIN_BAND_SIZE, DEFAULT_RHO, DyadicSpec
from gcckit.spectral.observability import DEFAULT_MAX_DENSE
from gcckit.types import Any, Report

# ------------------------------------------------------------------------------
# Sections
# ------------------------------------------------------------------------------


class Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class DomainSection(Section):
    """``[domain]``: kind plus the keyword arguments of its factory."""

    kind: DomainKind
    a: float = 0.0
    b: float = 1.0
    lo: tuple[float, float] = (0.0, 0.0)
    hi: tuple[float, float] = (1.0, 1.0)
    center: tuple[float, float] = (0.0, 0.0)
    radius: float = 1.0
    extent: float | None = None
    levelset: str | None = None
    box: tuple[tuple[float, float], tuple[float, float]] | None = None
    n_boundary: int | None = None

    @model_validator(mode="after")
    def _level_set_inputs(self):
        if self.kind == DomainKind.LEVEL_SET and (self.levelset is None or self.box is None):
            msg = "level_set domains need 'levelset' and 'box'"
            raise ValueError(msg)
        return self

    def build(self) -> Domain:
        match self.kind:
            case DomainKind.INTERVAL:
                return create_domain(self.kind, a=self.a, b=self.b)
            case DomainKind.SQUARE:
                return create_domain(self.kind, lo=self.lo, hi=self.hi)
            case DomainKind.DISC:
                return create_domain(self.kind, center=self.center, radius=self.radius)
            case DomainKind.HALF_PLANE:
                return create_domain(self.kind, **({} if self.extent is None else {"extent": self.extent}))
        kwargs = {} if self.n_boundary is None else {"n_boundary": self.n_boundary}
        phi = spatial_field(self.levelset, 2, key="domain.levelset")
        return create_domain(self.kind, phi=phi, box=self.box, **kwargs)


class MetricSection(Section):
    """``[metric]``: flat, conformal (``speed``), matrix (``g_ij``) or a random perturbation."""

    kind: MetricKind = MetricKind.FLAT
    speed: str | None = None
    matrix: list[list[str]] | None = None
    kappa: str | None = None
    derivative: Literal["autodiff", "fd"] = "autodiff"
    regularity: Regularity = Regularity.C1
    base: Literal["flat", "conformal", "matrix"] = "flat"
    eps: float = Field(default=0.0, ge=0.0)
    seed: int = 0
    mode: PerturbationMode = PerturbationMode.CONFORMAL
    perturb_kappa: bool = False

    def _unperturbed(self, kind: str, dim: int, tolerances: Tolerances) -> MetricField:
        kappa = None if self.kappa is None else spatial_field(self.kappa, dim, key="metric.kappa")
        if kind == MetricKind.FLAT:
            return flat_metric(dim, kappa)
        if kind == MetricKind.CONFORMAL:
            if self.speed is None:
                msg = "metric.speed: conformal metrics need a speed expression"
                raise ConfigurationError(msg)
            speed = spatial_field(self.speed, dim, key="metric.speed")
            return conformal_metric(speed, dim, kappa, derivative=self.derivative, regularity=self.regularity)
        if self.matrix is None or len(self.matrix) != dim or any(len(row) != dim for row in self.matrix):
            msg = f"metric.matrix: matrix metrics need {dim}x{dim} entries"
            raise ConfigurationError(msg)
        entries = [
            [spatial_field(text, dim, key=f"metric.matrix[{i}][{j}]") for j, text in enumerate(row)]
            for i, row in enumerate(self.matrix)
        ]

        def g(x):
            return jnp.stack([jnp.stack([f(x) for f in row], axis=-1) for row in entries], axis=-2)

        return create_metric(
            g,
            dim,
            kappa,
            derivative=self.derivative,
            regularity=self.regularity,
            h_fd=tolerances.h_fd,
            name="matrix",
        )

    def build(self, domain: Domain, tolerances: Tolerances = DEFAULT_TOLERANCES) -> MetricField:
        if self.kind != MetricKind.PERTURBED:
            return self._unperturbed(self.kind, domain.dim, tolerances)
        base = self._unperturbed(self.base, domain.dim, tolerances)
        return lipschitz_perturb(
            base,
            self.eps,
            self.seed,
            box=domain.bounding_box,
            mode=self.mode,
            perturb_kappa=self.perturb_kappa,
        )


class RegionSection(Section):
    """``[region]``: an observation region by shape name (see `create_region`)."""

    shape: Literal["interval", "strip", "box", "ball", "expression", "whole", "arc", "boundary", "endpoints"]
    a: float | None = None
    b: float | None = None
    axis: int | None = None
    lo: list[float] | float | None = None
    hi: list[float] | float | None = None
    center: list[float] | None = None
    radius: float | None = None
    expression: str | None = None
    width: float | None = None
    start: float | None = None
    stop: float | None = None
    sigmas: list[float] | None = None
    dilation: float = Field(default=0.0, ge=0.0)

    def build(self, domain: Domain) -> ObservationRegion:
        extra = {"dilation": self.dilation}
        if self.width is not None:
            extra["width"] = self.width
        match self.shape:
            case "interval":
                region = create_region(self.shape, self.a, self.b, **extra)
            case "strip":
                bounds = {k: v for k, v in (("lo", self.lo), ("hi", self.hi)) if v is not None}
                region = create_region(self.shape, self.axis or 0, **bounds, **extra)
            case "box":
                region = create_region(self.shape, self.lo, self.hi, **extra)
            case "ball":
                region = create_region(self.shape, self.center, self.radius, **extra)
            case "expression":
                region = create_region(self.shape, self.expression, domain.dim, **extra)
            case "arc":
                region = create_region(self.shape, domain, self.start, self.stop, **extra)
            case "endpoints":
                region = create_region(self.shape, domain, self.sigmas or [], **extra)
            case _:
                region = create_region(self.shape, domain, **extra)
        return region


class SamplingSection(Section):
    spacing: float = Field(default=DEFAULT_SPACING, gt=0.0)
    n_angles: int = Field(default=DEFAULT_ANGLES, ge=1)
    margin: float = Field(default=DEFAULT_MARGIN, ge=0.0)
    refine_factor: int = Field(default=DEFAULT_REFINE_FACTOR, ge=2)
    refine: bool = False

    def build(self) -> SamplingSpec:
        return SamplingSpec(self.spacing, self.n_angles, self.margin, self.refine_factor)


class BranchesSection(Section):
    n_branches: int = Field(default=1, ge=1)
    jitter: float = Field(default=0.0, ge=0.0)
    glancing_rule: GlancingRule = GlancingRule.BOTH
    rng_seed: int = 0

    def build(self) -> BranchPolicy:
        return BranchPolicy(self.n_branches, self.jitter, self.glancing_rule, self.rng_seed)


class SolverSection(Section):
    kind: SolverKind | None = None
    resolution: int = Field(default=201, ge=3)
    count: int = Field(default=20, ge=1)
    safety: float = Field(default=DEFAULT_BAND_SAFETY, gt=0.0, le=1.0)


class DyadicSection(Section):
    """``[dyadic]``: band parameters; without ``ks`` every covered band with ``min_size`` modes is swept."""

    alpha: float = DEFAULT_ALPHA
    rho: float = DEFAULT_RHO
    ks: list[int] | None = None
    min_size: int = Field(default=DEFAULT_MIN_BAND_SIZE, ge=1)

    def build(self) -> DyadicSpec:
        return DyadicSpec(self.alpha, self.rho)


class ObserveSection(Section):
    T: float = Field(default=1.0, gt=0.0)
    mode: GccMode = GccMode.STRONG
    delta: float | None = None
    observation: Observation | None = None
    max_dense: int = Field(default=DEFAULT_MAX_DENSE, ge=1)


class MeasureSection(Section):
    """``[measure]``: a coherent packet ladder paired with a bank of symbol expressions."""

    hs: list[float] = Field(default_factory=lambda: [2.0**-5, 2.0**-6, 2.0**-7])
    x0: list[float] = Field(default_factory=lambda: [0.5])
    xi0: list[float] = Field(default_factory=lambda: [1.0])
    lo: float = 0.0
    length: float = 1.0
    symbols: dict[str, str] = Field(default_factory=dict)
    partition_of_unity: bool = False
    mass_tolerance: float = Field(default=0.05, gt=0.0)
    leak_tolerance: float = Field(default=1e-3, gt=0.0)


class DivideSection(Section):
    """``[divide]``: ``b`` and ``p`` as expressions in ``t`` (base point), ``tau`` and ``zeta``."""

    b: str = "zeta"
    p: str = "zeta^2 - tau^2 - 1"
    chi: str | None = None
    t: list[float] = Field(default_factory=lambda: [0.0])
    tau: list[float] = Field(default_factory=lambda: [0.0, 0.5, 2.0])
    zeta: list[float] = Field(default_factory=lambda: [-2.0, -1.0, 0.0, 1.0, 2.0])

    def build(self):
        """``(b, p, chi)`` as boundary symbols ``f(y, eta, zeta)``."""
        names = ("t", "tau", "zeta")

        def boundary(text, key):
            fn = compile_expression(text, names, key=key, allow_complex=True)

            def symbol(y, eta, zeta):
                return fn(y[..., 0], eta[..., 0], zeta)

            return symbol

        chi = None
        if self.chi is not None:
            cutoff = compile_expression(self.chi, names[:2], key="divide.chi")

            def chi(y, eta):
                return cutoff(y[..., 0], eta[..., 0])

        return boundary(self.b, "divide.b"), boundary(self.p, "divide.p"), chi


class PerturbSection(Section):
    eps: list[float] = Field(default_factory=lambda: [0.0, 0.02])
    trials: int = Field(default=5, ge=1)
    seed: int = 0
    mode: PerturbationMode = PerturbationMode.CONFORMAL


class TolerancesSection(Section):
    h_fd: float = DEFAULT_TOLERANCES.h_fd
    tol_chart_analytic: float = DEFAULT_TOLERANCES.tol_chart_analytic
    tol_chart_fd: float = DEFAULT_TOLERANCES.tol_chart_fd
    eps_cls_rel: float = DEFAULT_TOLERANCES.eps_cls_rel
    eps_d: float = DEFAULT_TOLERANCES.eps_d
    hp2z_step: float = DEFAULT_TOLERANCES.hp2z_step
    tol_p: float = DEFAULT_TOLERANCES.tol_p
    tol_event: float = DEFAULT_TOLERANCES.tol_event

    def build(self) -> Tolerances:
        return Tolerances(**self.model_dump())


class OutputSection(Section):
    dir: str = "out"
    prefix: str = ""


class ExperimentConfig(Section):
    """A complete experiment: geometry, observation and per-command settings."""

    domain: DomainSection
    metric: MetricSection = Field(default_factory=MetricSection)
    region: RegionSection | None = None
    sampling: SamplingSection = Field(default_factory=SamplingSection)
    branches: BranchesSection = Field(default_factory=BranchesSection)
    solver: SolverSection = Field(default_factory=SolverSection)
    dyadic: DyadicSection = Field(default_factory=DyadicSection)
    observe: ObserveSection = Field(default_factory=ObserveSection)
    measure: MeasureSection = Field(default_factory=MeasureSection)
    divide: DivideSection = Field(default_factory=DivideSection)
    perturb: PerturbSection = Field(default_factory=PerturbSection)
    tolerances: TolerancesSection = Field(default_factory=TolerancesSection)
    output: OutputSection = Field(default_factory=OutputSection)

    def require_region(self) -> RegionSection:
        if self.region is None:
            msg = "region: this command needs a [region] table"
            raise ConfigurationError(msg)
        return self.region

    def resolved(self) -> Report:
        """The configuration with every default filled in, as plain JSON data."""
        return self.model_dump(mode="json")


# ------------------------------------------------------------------------------
# Loading
# ------------------------------------------------------------------------------


def locate_key(text: str, loc: tuple[Any, ...]) -> int | None:
    """1-based line of a dotted key in a TOML source, if it can be found.

    Only identifier path items are followed; list indices and union branches are
    ignored. A key missing from the file is reported at the header of its table.
    """
    path = [item for item in loc if isinstance(item, str) and item.isidentifier()]
    if not path:
        return None
    table, key = ".".join(path[:-1]), path[-1]
    current, header = "", None
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith("[") and not line.startswith("[["):
            current = line.strip("[]").strip()
            if current == ".".join(path):
                return number
            if current == table:
                header = number
            continue
        name = line.split("=", 1)[0].strip().strip('"')
        if "=" in line and current == table and name == key:
            return number
    return header


def _describe(error: pydantic.ValidationError, text: str | None) -> str:
    details = []
    for item in error.errors():
        dotted = ".".join(str(part) for part in item["loc"]) or "<root>"
        line = None if text is None else locate_key(text, item["loc"])
        where = f" (line {line})" if line is not None else ""
        details.append(f"{dotted}: {item['msg']}{where}")
    return "; ".join(details)


def parse_config(data: Report, text: str | None = None) -> ExperimentConfig:
    """Validate configuration data.

    Args:
        data: Parsed TOML (or a resolved configuration from a report).
        text: Source text, used to report line numbers.

    Raises:
        ConfigurationError: If the data violate the schema.
    """
    try:
        return ExperimentConfig.model_validate(data)
    except pydantic.ValidationError as error:
        msg = f"invalid configuration: {_describe(error, text)}"
        raise ConfigurationError(msg) from error


def load_config(path: str | Path) -> ExperimentConfig:
    """Read and validate a TOML configuration file.

    Raises:
        ConfigurationError: If the file is not valid TOML or violates the schema.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as error:
        msg = f"{path}: {error}"
        raise ConfigurationError(msg) from error
    config = parse_config(data, text)
    logger.debug(f"Loaded configuration {path} ({config.domain.kind} domain, {config.metric.kind} metric)")
    return config
