"""Artifact writers: JSON reports, CSV tables and standalone SVG plots."""

import csv
import datetime
import json
import math
from pathlib import Path

import jax
import matplotlib as mpl

mpl.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from gcckit.dynamics.generalized import GeneralizedTrajectory  # noqa: E402
from gcckit.errors import ConfigurationError  # noqa: E402
from gcckit.geometry.domain import Domain  # noqa: E402
from gcckit.types import Any, Report, Sequence  # noqa: E402

# Fixed hash salt and no date metadata keep SVG output byte-identical across runs.
mpl.rcParams["svg.hashsalt"] = "gcckit"
SVG_METADATA = {"Date": None}

BOUNDARY_SAMPLES = 400

# ------------------------------------------------------------------------------
# JSON
# ------------------------------------------------------------------------------


def to_json_data(value: Any) -> Any:
    """Plain JSON data: numpy scalars and arrays unpacked, non-finite floats as None."""
    if isinstance(value, dict):
        return {str(key): to_json_data(item) for key, item in value.items()}
    if isinstance(value, list | tuple):
        return [to_json_data(item) for item in value]
    if isinstance(value, np.ndarray | jax.Array):
        return to_json_data(np.asarray(value).tolist())
    if isinstance(value, np.generic):
        return to_json_data(value.item())
    if isinstance(value, complex):
        return [to_json_data(value.real), to_json_data(value.imag)]
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def timestamp() -> str:
    return datetime.datetime.now(datetime.UTC).isoformat(timespec="seconds")


def write_json(path: Path, report: Report) -> Path:
    """Write a report with sorted keys."""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(to_json_data(report), sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return path


def read_report(path: str | Path) -> Report:
    """Load a report written by `write_json`.

    Raises:
        ConfigurationError: If the file is not a report.
    """
    try:
        report = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as error:
        msg = f"{path}: not a JSON report ({error})"
        raise ConfigurationError(msg) from error
    missing = {"command", "arguments", "config", "results"} - set(report)
    if missing:
        msg = f"{path}: report lacks {sorted(missing)}"
        raise ConfigurationError(msg)
    return report


def same_results(expected: Any, actual: Any, rtol: float = 1e-9, atol: float = 1e-12) -> bool:
    """Recursive comparison with a relative tolerance on numbers."""
    if isinstance(expected, dict) and isinstance(actual, dict):
        return expected.keys() == actual.keys() and all(
            same_results(expected[key], actual[key], rtol, atol) for key in expected
        )
    if isinstance(expected, list) and isinstance(actual, list):
        return len(expected) == len(actual) and all(
            same_results(e, a, rtol, atol) for e, a in zip(expected, actual, strict=True)
        )
    numbers = (int, float)
    if isinstance(expected, numbers) and isinstance(actual, numbers) and not isinstance(expected, bool):
        return math.isclose(expected, actual, rel_tol=rtol, abs_tol=atol)
    return expected == actual


# ------------------------------------------------------------------------------
# CSV
# ------------------------------------------------------------------------------


def write_csv(path: Path, rows: Sequence[Report]) -> Path:
    """Write rows of equal keys, in the key order of the first row."""
    path.parent.mkdir(parents=True, exist_ok=True)
    header = list(rows[0]) if rows else []
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=header, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({key: _cell(value) for key, value in row.items()})
    return path


def _cell(value: Any) -> Any:
    value = to_json_data(value)
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, list):
        return " ".join(str(v) for v in value)
    return value


# ------------------------------------------------------------------------------
# SVG
# ------------------------------------------------------------------------------


def _save(fig, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata=SVG_METADATA)
    plt.close(fig)
    return path


def _draw_boundary(ax, domain: Domain) -> None:
    sigmas = np.linspace(0.0, domain.boundary_length, BOUNDARY_SAMPLES, endpoint=not domain.periodic)
    if domain.periodic:
        sigmas = np.append(sigmas, sigmas[0])
    points = np.array([np.asarray(domain.boundary_point(s)) for s in sigmas])
    ax.plot(points[:, 0], points[:, 1], color="black", linewidth=1.0)


def plot_rays(path: Path, domain: Domain, trajectories: Sequence[GeneralizedTrajectory], title: str = "") -> Path:
    """Spatial ray paths (2D) or world lines ``x(t)`` (1D)."""
    fig, ax = plt.subplots(figsize=(5, 5))
    if domain.dim == 2:
        if np.all(np.isfinite(np.asarray(domain.bounding_box))):
            _draw_boundary(ax, domain)
        for trajectory in trajectories:
            if trajectory.segments:
                ax.plot(*trajectory.positions.T, linewidth=0.8, label=f"branch {trajectory.branch_id}")
        ax.set_aspect("equal")
        ax.set_xlabel("x1")
        ax.set_ylabel("x2")
    else:
        (lo, hi), = domain.bounding_box
        for trajectory in trajectories:
            if trajectory.segments:
                ax.plot(trajectory.positions[:, 0], trajectory.times, linewidth=0.8)
        ax.axvline(lo, color="black")
        ax.axvline(hi, color="black")
        ax.set_xlabel("x")
        ax.set_ylabel("t")
    if title:
        ax.set_title(title)
    return _save(fig, path)


def plot_series(
    path: Path,
    x: Sequence[float],
    series: dict[str, Sequence[float | None]],
    *,
    xlabel: str,
    ylabel: str,
    logx: bool = False,
    logy: bool = False,
) -> Path:
    """Line plot of named series over a common abscissa (None values are skipped)."""
    fig, ax = plt.subplots(figsize=(6, 4))
    x = np.asarray(x, dtype=float)
    for name, values in series.items():
        y = np.array([np.nan if v is None else v for v in values], dtype=float)
        ax.plot(x, y, marker="o", label=name)
    if logx:
        ax.set_xscale("log")
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if len(series) > 1:
        ax.legend()
    return _save(fig, path)


def plot_heatmap(
    path: Path,
    values: np.ndarray,
    extent: tuple[float, float, float, float],
    *,
    xlabel: str,
    ylabel: str,
    title: str = "",
) -> Path:
    """Phase-space heatmap of a non-negative density."""
    fig, ax = plt.subplots(figsize=(6, 4))
    image = ax.imshow(values.T, origin="lower", extent=extent, aspect="auto", cmap="viridis")
    fig.colorbar(image, ax=ax)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    return _save(fig, path)
