"""Subcommands of ``gcc-kit``.

Each command builds its objects from an `ExperimentConfig` and the parsed
command-line arguments and returns a `CommandResult`; writing the artifacts is
left to `gcckit.cli.main`.
"""

import argparse
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from loguru import logger

from gcckit.cli import io
from gcckit.config import ExperimentConfig
from gcckit.control.gcc import (
    check_gcc,
    estimate_T_gcc,
    perturbation_sweep,
    verify_witness,
)
from gcckit.dynamics.generalized import advance_generalized
from gcckit.enums import GccMode, Verdict
from gcckit.errors import ConfigurationError
from gcckit.geometry.collar import CollarChart, build_collar_chart
from gcckit.geometry.domain import Domain
from gcckit.geometry.hamiltonian import PhasePoint, phase_point_from_direction
from gcckit.geometry.metric import MetricField, scaled_metric
from gcckit.measures.estimate import estimate_measure
from gcckit.measures.packets import PACKET_FREQUENCY_WIDTHS, create_packet, husimi_density
from gcckit.semiclassical.division import euclidean_divide
from gcckit.semiclassical.grid import create_grid, required_size
from gcckit.semiclassical.symbols import load_symbol_bank
from gcckit.spectral.assemble import assemble_and_eig
from gcckit.spectral.dyadic import covered_bands
from gcckit.spectral.observability import observability_sweep, spectrum_rows, sweep_trend
from gcckit.types import Callable, Report

MIN_PACKET_GRID = 64

# ------------------------------------------------------------------------------
# Results
# ------------------------------------------------------------------------------


@dataclass
class CommandResult:
    """What a command produced.

    Attributes:
        results: JSON-ready results, compared on replay.
        tables: CSV tables by file stem.
        figures: SVG writers by file stem.
        extra: Further JSON documents by file stem.
        exit_code: Process exit code.
    """

    results: Report
    tables: dict[str, list[Report]] = field(default_factory=dict)
    figures: dict[str, Callable[[Path], Path]] = field(default_factory=dict)
    extra: dict[str, Report] = field(default_factory=dict)
    exit_code: int = 0


@dataclass(frozen=True)
class Setting:
    """Geometry shared by the ray-based commands."""

    domain: Domain
    metric: MetricField
    chart: CollarChart

    @classmethod
    def from_config(cls, config: ExperimentConfig) -> "Setting":
        tolerances = config.tolerances.build()
        domain = config.domain.build()
        metric = config.metric.build(domain, tolerances)
        return cls(domain, metric, build_collar_chart(domain, metric, tolerances=tolerances))


# ------------------------------------------------------------------------------
# Rays
# ------------------------------------------------------------------------------


def _vector(text: str, key: str) -> np.ndarray:
    try:
        return np.array([float(part) for part in text.split(",")])
    except ValueError as error:
        msg = f"--init: cannot read {key}={text!r}"
        raise ConfigurationError(msg) from error


def parse_initial_point(text: str, metric: MetricField) -> PhasePoint:
    """Read ``x=..;dir=..`` (or ``x=..;xi=..[;tau=..]``) into a characteristic phase point.

    ``dir`` is an angle with a ``deg`` or ``rad`` suffix in 2D, or a vector.
    Without ``tau`` the covector data are completed with ``tau = +1``.

    Raises:
        ConfigurationError: If a field is missing or malformed.
    """
    fields = {}
    for item in text.split(";"):
        if "=" not in item:
            msg = f"--init: expected key=value, got {item!r}"
            raise ConfigurationError(msg)
        key, value = (part.strip() for part in item.split("=", 1))
        fields[key] = value
    if "x" not in fields:
        msg = "--init: the position x=... is required"
        raise ConfigurationError(msg)
    x = _vector(fields["x"], "x")
    tau = float(fields.get("tau", 1.0))
    if "xi" in fields:
        return PhasePoint(0.0, x, tau, _vector(fields["xi"], "xi"))
    direction = fields.get("dir")
    if direction is None:
        msg = "--init: give a direction dir=... or a covector xi=..."
        raise ConfigurationError(msg)
    if direction.endswith(("deg", "rad")):
        angle = float(direction[:-3])
        angle = math.radians(angle) if direction.endswith("deg") else angle
        vector = np.array([math.cos(angle), math.sin(angle)])
    else:
        vector = _vector(direction, "dir")
    if vector.shape != x.shape:
        msg = f"--init: direction of dimension {vector.size} at a point of dimension {x.size}"
        raise ConfigurationError(msg)
    return phase_point_from_direction(metric, x, vector, tau=tau)


def trace(config: ExperimentConfig, args: argparse.Namespace) -> CommandResult:
    setting = Setting.from_config(config)
    rho0 = parse_initial_point(args.init, setting.metric)
    T = args.time if args.time is not None else config.observe.T
    trajectories = advance_generalized(
        setting.metric, setting.chart, rho0, T, config.branches.build(), jobs=args.jobs
    )
    dim = setting.domain.dim
    header = ["branch", "s", "t", *(f"x{i + 1}" for i in range(dim)), "tau", *(f"xi{i + 1}" for i in range(dim)), "event"]
    rows = [dict(zip(header, row, strict=True)) for trajectory in trajectories for row in trajectory.to_rows()]
    results = {
        "branches": [
            {
                "branch": trajectory.branch_id,
                "t_reached": trajectory.t_reached,
                "jumps": len(trajectory.jumps),
                "events": [event.action for event in trajectory.events],
                "truncated": trajectory.truncated,
                "diagnostic": trajectory.diagnostic,
                "end": np.asarray(trajectory.end.to_state()) if trajectory.segments else None,
            }
            for trajectory in trajectories
        ]
    }
    return CommandResult(
        results,
        tables={"trace": rows},
        figures={"trace": lambda path: io.plot_rays(path, setting.domain, trajectories, title=args.init)},
    )


# ------------------------------------------------------------------------------
# Control
# ------------------------------------------------------------------------------


def _mode(config: ExperimentConfig, args: argparse.Namespace) -> GccMode:
    return GccMode(args.mode) if getattr(args, "mode", None) else config.observe.mode


def gcc(config: ExperimentConfig, args: argparse.Namespace) -> CommandResult:
    setting = Setting.from_config(config)
    region = config.require_region().build(setting.domain)
    T = args.time if args.time is not None else config.observe.T
    policy = config.branches.build()
    report = check_gcc(
        setting.metric,
        setting.domain,
        region,
        T,
        config.sampling.build(),
        policy,
        mode=_mode(config, args),
        chart=setting.chart,
        refine=config.sampling.refine,
        jobs=args.jobs,
    )
    results = report.to_dict()
    extra, figures = {}, {}
    if report.verdict == Verdict.FAILS:
        verified = [verify_witness(setting.metric, setting.domain, region, w, T, policy) for w in report.witnesses]
        results["witnesses_verified"] = verified
        extra["witnesses"] = {"T": T, "witnesses": [w.to_dict() for w in report.witnesses], "verified": verified}
        rays = [trajectory for witness in report.witnesses for trajectory in witness.trajectories]
        figures["witnesses"] = lambda path: io.plot_rays(path, setting.domain, rays, title=f"witnesses at T={T}")
    return CommandResult(
        results,
        tables={"witnesses": [w.to_dict() for w in report.witnesses]} if report.witnesses else {},
        figures=figures,
        extra=extra,
        exit_code=2 if report.verdict == Verdict.FAILS else 0,
    )


def tgcc(config: ExperimentConfig, args: argparse.Namespace) -> CommandResult:
    setting = Setting.from_config(config)
    region = config.require_region().build(setting.domain)
    estimate = estimate_T_gcc(
        setting.metric,
        setting.domain,
        region,
        args.t_max,
        config.sampling.build(),
        config.branches.build(),
        mode=_mode(config, args),
        resolution=args.resolution,
        recompute=args.recompute,
        chart=setting.chart,
        jobs=args.jobs,
    )
    rows = [{"T": T, "verdict": str(verdict)} for T, verdict in estimate.trace]
    return CommandResult(estimate.to_dict(), tables={"tgcc": rows})


def perturb(config: ExperimentConfig, args: argparse.Namespace) -> CommandResult:
    """Perturbation sweep; ``--scale`` replaces the random draws by a constant rescaling of ``g``."""
    setting = Setting.from_config(config)
    region = config.require_region().build(setting.domain)
    section = config.perturb
    hook = None
    if args.scale is not None:

        def hook(metric, eps, seed, **kwargs):
            return scaled_metric(metric, args.scale)

    rows = perturbation_sweep(
        setting.metric,
        setting.domain,
        region,
        args.time if args.time is not None else config.observe.T,
        section.eps,
        section.trials,
        config.sampling.build(),
        config.branches.build(),
        mode=_mode(config, args),
        perturbation=section.mode,
        perturb=hook,
        seed=section.seed,
        jobs=args.jobs,
    )
    return CommandResult(
        {"rows": rows, "stable": all(row["pass_rate"] == 1.0 for row in rows)},
        tables={"perturb": rows},
        figures={
            "perturb": lambda path: io.plot_series(
                path, [row["eps"] for row in rows], {"pass rate": [row["pass_rate"] for row in rows]},
                xlabel="eps", ylabel="pass rate",
            )
        },
    )


# ------------------------------------------------------------------------------
# Spectral
# ------------------------------------------------------------------------------


def _basis(config: ExperimentConfig, count: int | None = None):
    tolerances = config.tolerances.build()
    domain = config.domain.build()
    metric = config.metric.build(domain, tolerances)
    solver = config.solver
    basis = assemble_and_eig(
        domain, metric, solver.resolution, count or solver.count, solver=solver.kind, safety=solver.safety
    )
    return domain, basis


def spectrum(config: ExperimentConfig, args: argparse.Namespace) -> CommandResult:
    _, basis = _basis(config, args.count)
    rows = spectrum_rows(basis)
    return CommandResult(
        {"lambdas": [row["lambda"] for row in rows], "count": basis.count, "mesh": basis.mesh.kind},
        tables={"spectrum": rows},
    )


def observe(config: ExperimentConfig, args: argparse.Namespace) -> CommandResult:
    domain, basis = _basis(config)
    region = config.require_region().build(domain)
    section = config.observe
    spec = config.dyadic.build()
    T = args.time if args.time is not None else section.T
    ks = args.k or config.dyadic.ks or covered_bands(spec, basis, min_size=config.dyadic.min_size)
    if not ks:
        msg = f"no band with {config.dyadic.min_size} modes fits in the {basis.count} computed eigenpairs"
        raise ConfigurationError(msg)
    rows = observability_sweep(
        basis,
        spec,
        region,
        T,
        ks,
        observation=section.observation,
        delta=section.delta,
        max_dense=section.max_dense,
    )
    finite = [row["C"] for row in rows if row["C"] is not None]
    results = {
        "T": T,
        "bands": rows,
        "max_C": max(finite) if finite else None,
        **sweep_trend(rows),
    }
    return CommandResult(
        results,
        tables={"observe": rows},
        figures={
            "observe": lambda path: io.plot_series(
                path, [row["k"] for row in rows], {"C(k)": [row["C"] for row in rows]},
                xlabel="k", ylabel="C(k)", logy=True,
            )
        },
    )


# ------------------------------------------------------------------------------
# Semiclassical
# ------------------------------------------------------------------------------


def measure(config: ExperimentConfig, args: argparse.Namespace) -> CommandResult:
    section = config.measure
    if not section.symbols:
        msg = "measure.symbols: the measure command needs at least one symbol"
        raise ConfigurationError(msg)
    dim = len(section.x0)
    bank = load_symbol_bank(section.symbols, dim)
    xi_norm = float(np.linalg.norm(section.xi0))
    packets = []
    for h in section.hs:
        # symbols given as expressions are not compactly supported in xi
        radius = 2.0 * (xi_norm + PACKET_FREQUENCY_WIDTHS * math.sqrt(h))
        n = max(required_size(radius, h, section.length), MIN_PACKET_GRID)
        grid = create_grid(dim, n, section.lo, section.lo + section.length)
        packets.append(create_packet(grid, section.x0, section.xi0, h))
    estimate = estimate_measure(
        [packet.sample for packet in packets],
        bank,
        partition_of_unity=section.partition_of_unity,
        mass_tolerance=section.mass_tolerance,
        jobs=args.jobs,
        leak_tolerance=section.leak_tolerance,
    )
    rows = [
        {"symbol": name, "h": h, "re": value.real, "im": value.imag}
        for i, name in enumerate(estimate.names)
        for h, value in zip(estimate.hs, estimate.pairings[i], strict=True)
    ]
    figures = {
        "measure": lambda path: io.plot_series(
            path, estimate.hs, {name: estimate.pairings[i].real for i, name in enumerate(estimate.names)},
            xlabel="h", ylabel="Re <Op(a) u, u>", logx=True,
        )
    }
    if dim == 1:
        finest = min(packets, key=lambda packet: packet.h)
        centres, frequencies, density = husimi_density(finest.sample)
        extent = (float(centres[0]), float(centres[-1]), float(frequencies[0]), float(frequencies[-1]))
        figures["phase_space"] = lambda path: io.plot_heatmap(
            path, density, extent, xlabel="x", ylabel="h xi", title=f"h = {finest.h:.4g}"
        )
    return CommandResult(estimate.to_dict(), tables={"measure": rows}, figures=figures)


def divide(config: ExperimentConfig, args: argparse.Namespace) -> CommandResult:
    section = config.divide
    b, p, chi = section.build()
    t, tau = np.meshgrid(np.asarray(section.t, dtype=float), np.asarray(section.tau, dtype=float), indexing="ij")
    y, eta = t.reshape(-1, 1), tau.reshape(-1, 1)
    result = euclidean_divide(b, p, y, eta, np.asarray(section.zeta, dtype=float), chi=chi)
    rows = [
        {
            "t": float(y[i, 0]),
            "tau": float(eta[i, 0]),
            "b0": complex(result.b0[i]),
            "b1": complex(result.b1[i]),
            "confluent": bool(result.confluent[i]),
        }
        for i in range(len(y))
    ]
    results = {**result.to_dict(), "points": rows}
    logger.info(f"Divided at {len(rows)} points; residual away from roots {results['max_residual_away']:.3e}")
    table = [
        {
            "t": row["t"],
            "tau": row["tau"],
            "b0_re": row["b0"].real,
            "b0_im": row["b0"].imag,
            "b1_re": row["b1"].real,
            "b1_im": row["b1"].imag,
            "confluent": row["confluent"],
        }
        for row in rows
    ]
    return CommandResult(results, tables={"divide": table})


COMMANDS: dict[str, Callable[[ExperimentConfig, argparse.Namespace], CommandResult]] = {
    "trace": trace,
    "gcc": gcc,
    "tgcc": tgcc,
    "observe": observe,
    "spectrum": spectrum,
    "measure": measure,
    "divide": divide,
    "perturb": perturb,
}
