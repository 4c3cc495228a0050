"""Command-line interface: every computation as a reproducible JSON job."""

from __future__ import annotations

import argparse
from collections.abc import Callable, Sequence
import itertools
import json
import logging
from pathlib import Path
import sys
from typing import Any

import numpy as np
import voluptuous as vol

from .const import (
    COVARIANCE_SIGMAS,
    DEFAULT_MAX_LEVELS,
    DEFAULT_SEED,
    EXIT_FAILURE,
    EXIT_OK,
    EXIT_USAGE,
    KERNEL_LADDER,
    MONO_TOL,
    SCHEDULE_PREFIX,
    VERSION,
)
from .continuum import (
    ContinuousKernel,
    bridge_covariance_check,
    canonical_point,
    pair_function,
    restrict,
    sample_bridge_paths,
    self_energy_radii,
)
from .diagnostics import Check, JobResult, atomic_write_text, inputs_digest
from .exceptions import BadParameter, GraphRkhsError
from .network import (
    WeightedGraph,
    dipole_system,
    grounded_laplacian,
    ladder_pair,
    laplacian_matrix,
    load_graph,
    network_kernel,
    read_edge_list,
    resistance_metric,
)
from .rkhs_core import (
    Exhaustion,
    PairKernel,
    finite_laplacian,
    membership_diagnostic,
    point_label,
    size_schedule,
)
from .schemas import (
    GRID_SCHEMA,
    KERNEL_NAME_SCHEMA,
    MATRIX_SCHEMA,
    POINTS_SCHEMA,
    TIMES_SCHEMA,
)
from .semigroup import (
    green_from_semigroup,
    green_quadrature,
    heat_kernel,
    semigroup_defect,
    spectral_decompose,
)

_LOGGER = logging.getLogger(__name__)

EMIT_CHOICES = ("dipoles", "kernel", "resistance", "laplacian")
CHECK_CHOICES = ("semigroup", "green")


class UsageError(Exception):
    """Exception raised for invalid command-line input (exit code 2)."""


def _json_argument(text: str, schema: vol.Schema, what: str) -> Any:
    """Parse inline JSON, or the JSON file it names, against a schema."""
    try:
        if not text.lstrip().startswith(("[", "{")) and Path(text).is_file():
            text = Path(text).read_text(encoding="utf-8")
        return schema(json.loads(text))
    except json.JSONDecodeError as err:
        raise UsageError(f"{what} is not valid JSON: {err}") from err
    except UnicodeDecodeError as err:
        raise UsageError(f"{what} is not valid UTF-8: {err.reason}") from err
    except vol.Invalid as err:
        raise UsageError(f"{what} is invalid: {err}") from err


def _target_first(points: Sequence[Any], target: Any) -> list[Any]:
    labels = [point_label(p) for p in points]
    label = point_label(target)
    if label not in labels:
        raise UsageError(f"Target {label} is not among the points")
    position = labels.index(label)
    return [points[position], *points[:position], *points[position + 1 :]]


def _ladder_sequence(target: int) -> Callable[[int], int]:
    """Target first, then 0, 1, 2, … without the target."""

    def point_at(k: int) -> int:
        if k == 0:
            return target
        return k - 1 if k - 1 < target else k

    return point_at


def _graph_membership(
    graph: WeightedGraph, base: str | None, target: str, points: list[Any] | None
) -> tuple[PairKernel, list[str]]:
    base = base if base is not None else graph.vertices[0]
    if base not in graph.vertices:
        raise UsageError(f"Base {base} is not a vertex")
    if target == base:
        raise UsageError(f"Target {target} is the base vertex")
    kernel = network_kernel(graph, base)
    members = [str(p) for p in points] if points is not None else list(kernel.points)
    for member in members:
        if member not in kernel.points:
            raise UsageError(f"Point {member} is not a non-base vertex")

    def evaluate(x: Any, y: Any) -> float:
        return float(kernel.gram[kernel.index(x), kernel.index(y)])

    return evaluate, members


def cmd_membership(args: argparse.Namespace) -> JobResult:
    """Run the δₓ membership diagnostic over an exhaustion."""
    points = (
        _json_argument(args.points, POINTS_SCHEMA, "--points")
        if args.points is not None
        else None
    )
    inputs: dict[str, Any] = {
        "kernel": args.kernel,
        "points": points,
        "schedule": args.exhaustion,
        "target": args.target,
        "base": args.base,
        "max_levels": args.max_levels,
    }
    exhaustion: Exhaustion
    kernel_path = Path(args.kernel)

    if kernel_path.is_file():
        source = read_edge_list(kernel_path)
        inputs["graph"] = source
        evaluate, members = _graph_membership(load_graph(source), args.base, args.target, points)
        ordered = _target_first(members, args.target)
        exhaustion = _exhaustion(ordered, args.exhaustion)
        target: Any = args.target
    else:
        try:
            KERNEL_NAME_SCHEMA(args.kernel)
        except vol.Invalid as err:
            raise UsageError(f"Unknown kernel {args.kernel!r}") from err
        name, _, parameter = args.kernel.partition(":")
        if name == KERNEL_LADDER:
            evaluate, exhaustion, target = _ladder_membership(parameter, args, points)
        else:
            try:
                continuous = ContinuousKernel.from_name(args.kernel)
            except BadParameter as err:
                raise UsageError(str(err)) from err
            if points is None:
                raise UsageError(f"--points is required for kernel {args.kernel}")
            try:
                members = [canonical_point(continuous, p) for p in points]
                target = canonical_point(continuous, json.loads(args.target))
            except (json.JSONDecodeError, TypeError, ValueError) as err:
                raise UsageError(f"Points or target do not fit {args.kernel}: {err}") from err
            ordered = _target_first(members, target)
            restrict(continuous, ordered)
            radii = self_energy_radii(continuous, ordered) if continuous.singular else None
            evaluate = pair_function(continuous, radii=radii)
            exhaustion = _exhaustion(ordered, args.exhaustion)

    diagnostic = membership_diagnostic(evaluate, exhaustion, target, args.max_levels)
    drops = [a - b for a, b in itertools.pairwise(diagnostic.values)]
    largest_drop = max([0.0, *drops])
    scale = max(1.0, *diagnostic.values)
    outputs = {
        "kernel": args.kernel,
        "target": diagnostic.target,
        "schedule": args.exhaustion,
        "values": list(diagnostic.values),
        "subset_sizes": list(diagnostic.subset_sizes),
        "verdict": diagnostic.verdict.value,
        "limit": diagnostic.limit,
    }
    checks = [Check.at_most("monotone_values", largest_drop, MONO_TOL * scale)]
    return JobResult("membership", inputs_digest("membership", inputs), outputs, checks)


def _exhaustion(ordered: list[Any], schedule: str) -> Exhaustion:
    try:
        return Exhaustion.from_points(ordered, size_schedule(schedule, len(ordered)))
    except BadParameter as err:
        raise UsageError(str(err)) from err


def _ladder_membership(
    parameter: str, args: argparse.Namespace, points: list[Any] | None
) -> tuple[PairKernel, Exhaustion, int]:
    try:
        ratio = float(parameter)
        target = int(args.target)
        evaluate = ladder_pair(ratio)
    except (ValueError, BadParameter) as err:
        raise UsageError(f"Invalid ladder kernel or target: {err}") from err
    if target < 0:
        raise UsageError("Ladder vertices are non-negative integers")
    if points is not None:
        members = [int(p) for p in points]
        return evaluate, _exhaustion(_target_first(members, target), args.exhaustion), target
    try:
        sizes = size_schedule(args.exhaustion)
    except BadParameter as err:
        raise UsageError(str(err)) from err
    return evaluate, Exhaustion.from_sequence(_ladder_sequence(target), sizes), target


def _named_matrix(vertices: Sequence[str], matrix: np.ndarray) -> dict[str, Any]:
    return {"vertices": list(vertices), "matrix": matrix.tolist()}


def cmd_network(args: argparse.Namespace) -> JobResult:
    """Emit dipoles, the network kernel, the resistance metric or the Laplacian."""
    source = read_edge_list(args.graph)
    graph = load_graph(source)
    if args.base not in graph.vertices:
        raise UsageError(f"Base {args.base} is not a vertex")
    inputs = {"graph": source, "base": args.base, "emit": args.emit}
    outputs: dict[str, Any] = {"base": args.base, "emit": args.emit}
    checks: list[Check] = []

    if args.emit == "dipoles":
        system = dipole_system(graph, args.base)
        outputs["dipoles"] = system.as_mapping()
        o = graph.index(args.base)
        target = np.eye(graph.size)
        target[:, o] -= 1.0
        target[o, :] = 0.0
        residual = float(np.abs(system.potentials @ laplacian_matrix(graph) - target).max())
        tolerance = 1e-10 * max(1.0, float(np.abs(system.potentials).max()))
        checks.append(Check.at_most("dipole_residual", residual, tolerance))
    elif args.emit == "kernel":
        kernel = network_kernel(graph, args.base)
        outputs["kernel"] = _named_matrix(kernel.points, kernel.gram)
        deviation = float(
            np.abs(finite_laplacian(kernel) - grounded_laplacian(graph, args.base)).max()
        )
        checks.append(Check.at_most("green_identity", deviation, 1e-8))
    elif args.emit == "resistance":
        resistance = resistance_metric(graph, args.base)
        values = resistance.values
        o = graph.index(args.base)
        kernel = network_kernel(graph, args.base)
        keep = [i for i in range(graph.size) if i != o]
        rebuilt = (values[o][:, None] + values[o][None, :] - values) / 2
        deviation = float(np.abs(rebuilt[np.ix_(keep, keep)] - kernel.gram).max())
        outputs["resistance"] = _named_matrix(graph.vertices, values)
        checks.append(Check.at_most("gm1_identity", deviation, 1e-10))
        checks.append(Check.at_most("triangle_defect", resistance.triangle_defect(), 1e-9))
    else:
        laplacian = laplacian_matrix(graph)
        outputs["laplacian"] = _named_matrix(graph.vertices, laplacian)
        checks.append(
            Check.at_most("row_sums", float(np.abs(laplacian.sum(axis=1)).max()), 1e-12)
        )
    return JobResult("network", inputs_digest("network", inputs), outputs, checks)


def cmd_bridge_sample(args: argparse.Namespace) -> JobResult:
    """Sample bridge paths to CSV and compare their covariance with s∧t − st."""
    grid = _json_argument(args.grid, GRID_SCHEMA, "--grid")
    if args.paths < 1:
        raise UsageError("--paths must be at least 1")
    sample = sample_bridge_paths(grid, args.paths, args.seed)
    atomic_write_text(args.out, sample.csv_text())
    outputs: dict[str, Any] = {
        "grid": grid,
        "paths": args.paths,
        "seed": args.seed,
        "csv": str(args.out),
    }
    checks: list[Check] = []
    # A single path has no sample covariance
    if args.paths >= 2:
        report = bridge_covariance_check(sample, COVARIANCE_SIGMAS)
        outputs["empirical_covariance"] = report.empirical.tolist()
        outputs["analytic_covariance"] = report.analytic.tolist()
        outputs["max_z"] = report.max_z
        checks.append(Check.at_most("covariance_max_z", report.max_z, COVARIANCE_SIGMAS))
        checks.append(Check.at_most("mean_max_z", report.mean_max_z, COVARIANCE_SIGMAS))
    inputs = {"grid": grid, "paths": args.paths, "seed": args.seed}
    return JobResult("bridge-sample", inputs_digest("bridge-sample", inputs), outputs, checks)


def cmd_heat(args: argparse.Namespace) -> JobResult:
    """Heat kernels at the requested times, with a semigroup or Green check."""
    matrix = _json_argument(args.laplacian, MATRIX_SCHEMA, "--laplacian")
    times = _json_argument(args.times, TIMES_SCHEMA, "--times")
    decomposition = spectral_decompose(matrix)
    outputs: dict[str, Any] = {
        "check": args.check,
        "eigenvalues": decomposition.eigenvalues.tolist(),
        "heat_kernels": [
            {"t": t, "matrix": heat_kernel(decomposition, t).tolist()} for t in times
        ],
    }
    checks: list[Check] = []
    if args.check == "semigroup":
        pairs = list(itertools.combinations_with_replacement(times, 2))[:20]
        defect = max(semigroup_defect(decomposition, s, t) for s, t in pairs)
        checks.append(Check.at_most("semigroup_defect", defect, 1e-10))
    elif args.check == "green":
        green = green_from_semigroup(decomposition)
        outputs["green"] = green.tolist()
        deviation = float(np.abs(green - green_quadrature(decomposition)).max())
        tolerance = 1e-6 * max(1.0, float(np.abs(green).max()))
        checks.append(Check.at_most("green_quadrature", deviation, tolerance))
    inputs = {"laplacian": matrix, "times": times, "check": args.check}
    return JobResult("heat", inputs_digest("heat", inputs), outputs, checks)


COMMANDS: dict[str, Callable[[argparse.Namespace], JobResult]] = {
    "membership": cmd_membership,
    "network": cmd_network,
    "bridge-sample": cmd_bridge_sample,
    "heat": cmd_heat,
}


def _parse_args(argv: Sequence[str] | None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(
        prog="graph-rkhs",
        description="Reproducing kernels, electrical networks and Dirac masses.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {VERSION}")
    parser.add_argument(
        "-v", "--verbose", action="store_true", help="Log debug output to stderr"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    membership = commands.add_parser("membership", help="δₓ membership diagnostic")
    membership.add_argument(
        "--kernel", required=True, help="bm, bridge, disk2, disk3, newton:ν, ladder:R or an edge-list file"
    )
    membership.add_argument("--points", help="JSON point list (or a file holding one)")
    membership.add_argument(
        "--exhaustion",
        default=SCHEDULE_PREFIX,
        help="prefix, linear:k or full (default: prefix)",
    )
    membership.add_argument("--target", required=True, help="Point x, as JSON or a vertex name")
    membership.add_argument("--base", help="Base vertex for edge-list kernels (default: first vertex)")
    membership.add_argument("--max-levels", type=int, default=DEFAULT_MAX_LEVELS)

    network = commands.add_parser("network", help="Dipoles, kernel, resistance or Laplacian")
    network.add_argument("--graph", required=True, type=Path, help="Edge-list file")
    network.add_argument("--base", required=True, help="Base vertex o")
    network.add_argument("--emit", required=True, choices=EMIT_CHOICES)

    bridge = commands.add_parser("bridge-sample", help="Sample Brownian bridge paths")
    bridge.add_argument("--grid", required=True, help="JSON list of times in (0, 1)")
    bridge.add_argument("--paths", required=True, type=int)
    bridge.add_argument("--seed", type=int, default=DEFAULT_SEED)
    bridge.add_argument("--out", required=True, type=Path, help="CSV output path")

    heat = commands.add_parser("heat", help="Heat kernels of a Laplacian")
    heat.add_argument("--laplacian", required=True, help="JSON matrix or a file holding one")
    heat.add_argument("--times", required=True, help="JSON list of times")
    heat.add_argument("--check", choices=CHECK_CHOICES)

    return parser.parse_args(argv)


def main(argv: Sequence[str] | None = None) -> int:
    """Run one command and print its JobResult; return the exit code."""
    try:
        args = _parse_args(argv)
    except SystemExit as err:
        return int(err.code or 0)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )

    try:
        result = COMMANDS[args.command](args)
        payload = result.to_json()
    except UsageError as err:
        _LOGGER.error(f"{args.command}: {err}")
        return EXIT_USAGE
    except GraphRkhsError as err:
        _LOGGER.error(f"{args.command} failed with {err.code}: {err}")
        print(json.dumps({"error": {"code": err.code, "message": str(err)}}, indent=2))
        return EXIT_FAILURE
    except OSError as err:
        _LOGGER.error(f"{args.command} failed: {err}")
        print(json.dumps({"error": {"code": "IOError", "message": str(err)}}, indent=2))
        return EXIT_FAILURE

    print(payload)
    _LOGGER.info(
        f"{args.command} finished, {sum(c.passed for c in result.diagnostics)}"
        f"/{len(result.diagnostics)} checks passed"
    )
    return EXIT_OK
