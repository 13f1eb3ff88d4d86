"""``gcc-kit``: batch experiments on rays, control and observability."""

import argparse
import sys
from pathlib import Path

import pydantic
from loguru import logger

import gcckit
from gcckit.cli import io
from gcckit.cli.commands import COMMANDS, CommandResult
from gcckit.config import ExperimentConfig, load_config, parse_config
from gcckit.enums import GccMode
from gcckit.errors import ConfigurationError, GccKitError
from gcckit.types import Report

EXIT_OK = 0
EXIT_ERROR = 1

# Parsed options that never change a result.
RUN_OPTIONS = ("command", "config", "out", "jobs", "verbose", "quiet", "replay")

# ------------------------------------------------------------------------------
# Parser
# ------------------------------------------------------------------------------


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", required=True, help="TOML experiment file.")
    sub.add_argument("--out", default=None, help="Artifact directory (default: [output].dir).")


def _add_time(sub: argparse.ArgumentParser, help_text: str) -> None:
    sub.add_argument("--time", type=float, default=None, help=help_text)


def _add_mode(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--mode", choices=[m.value for m in GccMode], default=None, help="Override [observe].mode.")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gcc-kit",
        description="Generalized bicharacteristics, the geometric control condition and observability of waves.",
    )
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", action="store_true", help="Log debug messages.")
    verbosity.add_argument("--quiet", action="store_true", help="Log warnings and errors only.")
    parser.add_argument("--jobs", type=int, default=None, help="Worker threads for ray and pairing tasks.")
    parser.add_argument("--replay", default=None, metavar="REPORT", help="Re-run a JSON report and compare its results.")
    subparsers = parser.add_subparsers(dest="command")

    sub = subparsers.add_parser("trace", help="Trace generalized bicharacteristics from one point.")
    _add_common(sub)
    sub.add_argument("--init", required=True, help='Initial point, e.g. "x=0,0;dir=30deg" or "x=0.5;xi=2".')
    _add_time(sub, "Time span (default: [observe].T).")

    sub = subparsers.add_parser("gcc", help="Decide the geometric control condition at a time.")
    _add_common(sub)
    _add_time(sub, "Control time (default: [observe].T).")
    _add_mode(sub)

    sub = subparsers.add_parser("tgcc", help="Bisect for the minimal control time.")
    _add_common(sub)
    sub.add_argument("--t-max", type=float, required=True, help="Upper end of the search.")
    sub.add_argument("--resolution", type=float, default=0.01, help="Bracket width at which to stop.")
    sub.add_argument("--recompute", action="store_true", help="Re-trace at every bisection time.")
    _add_mode(sub)

    sub = subparsers.add_parser("observe", help="Dyadic observability constants C(k).")
    _add_common(sub)
    _add_time(sub, "Observation time (default: [observe].T).")
    sub.add_argument("--k", type=int, nargs="+", default=None, help="Dyadic indices (default: [dyadic].ks, else every covered band of [dyadic].min_size modes).")

    sub = subparsers.add_parser("spectrum", help="Dirichlet eigenvalues.")
    _add_common(sub)
    sub.add_argument("--count", type=int, default=None, help="Number of eigenpairs (default: [solver].count).")

    sub = subparsers.add_parser("measure", help="Semiclassical measure of a packet ladder.")
    _add_common(sub)

    sub = subparsers.add_parser("divide", help="Euclidean division of boundary symbols.")
    _add_common(sub)

    sub = subparsers.add_parser("perturb", help="GCC pass rate under metric perturbations.")
    _add_common(sub)
    _add_time(sub, "Control time (default: [observe].T).")
    sub.add_argument("--scale", type=float, default=None, help="Rescale g by this factor instead of random draws.")
    _add_mode(sub)
    return parser


def configure_logging(verbose: bool = False, quiet: bool = False) -> None:
    level = "DEBUG" if verbose else "WARNING" if quiet else "INFO"
    logger.remove()
    logger.add(sys.stderr, level=level, format="<level>{level: <8}</level> | {message}")


# ------------------------------------------------------------------------------
# Running
# ------------------------------------------------------------------------------


def command_arguments(args: argparse.Namespace) -> Report:
    """The parsed options a result depends on."""
    return {key: value for key, value in vars(args).items() if key not in RUN_OPTIONS}


def execute(command: str, config: ExperimentConfig, args: argparse.Namespace) -> tuple[CommandResult, Report]:
    """Run a command and assemble its report."""
    logger.info(f"Running {command}")
    result = COMMANDS[command](config, args)
    report = {
        "command": command,
        "arguments": command_arguments(args),
        "config": config.resolved(),
        "version": gcckit.__version__,
        "created": io.timestamp(),
        "exit_code": result.exit_code,
        "results": result.results,
    }
    return result, io.to_json_data(report)


def write_artifacts(out: Path, prefix: str, command: str, result: CommandResult, report: Report) -> list[Path]:
    paths = [io.write_json(out / f"{prefix}{command}.json", report)]
    for stem, rows in result.tables.items():
        paths.append(io.write_csv(out / f"{prefix}{stem}.csv", rows))
    for stem, document in result.extra.items():
        paths.append(io.write_json(out / f"{prefix}{stem}.json", document))
    for stem, draw in result.figures.items():
        paths.append(draw(out / f"{prefix}{stem}.svg"))
    return paths


def run_command(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    result, report = execute(args.command, config, args)
    out = Path(args.out) if args.out else Path(config.output.dir)
    paths = write_artifacts(out, config.output.prefix, args.command, result, report)
    logger.info(f"Wrote {', '.join(str(path) for path in paths)}")
    return result.exit_code


def replay(path: str, jobs: int | None = None) -> int:
    """Re-run a report; 0 when its verdict (or, lacking one, all its results) is reproduced."""
    report = io.read_report(path)
    command = report["command"]
    if command not in COMMANDS:
        msg = f"{path}: unknown command {command!r}"
        raise ConfigurationError(msg)
    config = parse_config(report["config"])
    args = argparse.Namespace(**report["arguments"], jobs=jobs)
    _, again = execute(command, config, args)
    expected, actual = report["results"], again["results"]
    if "verdict" in expected:
        reproduced = expected["verdict"] == actual.get("verdict")
        logger.info(f"Replayed verdict {actual.get('verdict')} against {expected['verdict']}")
    else:
        reproduced = io.same_results(expected, actual)
    if not reproduced:
        logger.error(f"{path}: results of {command} were not reproduced")
        return EXIT_ERROR
    logger.info(f"{path}: reproduced")
    return EXIT_OK


def run(argv: list[str] | None = None) -> int:
    """Parse ``argv``, run one command and return the exit code.

    Exit codes are 0 on success, 2 when ``gcc`` finds the condition fails and
    1 on any error (with a one-line message on stderr).
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose, args.quiet)
    if args.replay is None and args.command is None:
        parser.error("a command or --replay is required")
    try:
        if args.replay is not None:
            return replay(args.replay, args.jobs)
        return run_command(args)
    except (GccKitError, OSError) as error:
        logger.error(f"{type(error).__name__}: {error}")
    except pydantic.ValidationError as error:
        logger.error(f"invalid report configuration: {error.errors()[0]['loc']} {error.errors()[0]['msg']}")
    return EXIT_ERROR


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
