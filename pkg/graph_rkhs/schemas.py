"""Voluptuous schemas for inputs, environment and JobResult payloads."""

from __future__ import annotations

from collections.abc import Mapping
import math
import os
from typing import Any

import voluptuous as vol

from .const import (
    ENV_THREADS,
    KERNEL_BM,
    KERNEL_BRIDGE,
    KERNEL_DISK2,
    KERNEL_DISK3,
    KERNEL_LADDER,
    KERNEL_NEWTON,
    SCHEMA_VERSION,
)
from .exceptions import ConfigError, ConsistencyError


def _finite(value: float) -> float:
    if not math.isfinite(value):
        raise vol.Invalid(f"{value} is not finite")
    return value


def _increasing_in_unit(values: list[float]) -> list[float]:
    if any(not 0 < v < 1 for v in values):
        raise vol.Invalid("grid points must lie in (0, 1)")
    if any(b <= a for a, b in zip(values, values[1:], strict=False)):
        raise vol.Invalid("grid must be strictly increasing")
    return values


def _integer(value: Any) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise vol.Invalid(f"{value!r} is not an integer")
    return value


def _square(rows: list[list[float]]) -> list[list[float]]:
    if any(len(row) != len(rows) for row in rows):
        raise vol.Invalid("matrix must be square")
    return rows


NUMBER = vol.All(vol.Any(int, float), vol.Coerce(float), _finite)
POINT = vol.Any(_integer, NUMBER, vol.All([NUMBER], vol.Length(min=1)), str)

EDGE_ROW_SCHEMA = vol.Schema(vol.ExactSequence([str, str, vol.Coerce(float)]))
POINTS_SCHEMA = vol.Schema(vol.All([POINT], vol.Length(min=1)))
GRID_SCHEMA = vol.Schema(vol.All([NUMBER], vol.Length(min=1), _increasing_in_unit))
MATRIX_SCHEMA = vol.Schema(
    vol.All([vol.All([NUMBER], vol.Length(min=1))], vol.Length(min=1), _square)
)
TIMES_SCHEMA = vol.Schema(vol.All([NUMBER], vol.Length(min=1)))
KERNEL_NAME_SCHEMA = vol.Schema(
    vol.Any(
        vol.In([KERNEL_BM, KERNEL_BRIDGE, KERNEL_DISK2, KERNEL_DISK3]),
        vol.Match(rf"^{KERNEL_NEWTON}:\d+$"),
        vol.Match(rf"^{KERNEL_LADDER}:[0-9.eE+-]+$"),
    )
)
THREADS_SCHEMA = vol.Schema(vol.All(vol.Coerce(int), vol.Range(min=0)))


def configured_threads(environ: Mapping[str, str] | None = None) -> int:
    """Return the worker cap from RKHS_THREADS, 0 or unset meaning all CPUs."""
    environ = os.environ if environ is None else environ
    raw = environ.get(ENV_THREADS, "0")
    try:
        threads = THREADS_SCHEMA(raw.strip())
    except vol.Invalid as err:
        raise ConfigError(f"{ENV_THREADS}={raw!r} is not a non-negative integer") from err
    return threads or os.cpu_count() or 1


CHECK_SCHEMA = vol.Schema(
    {
        vol.Required("check_name"): str,
        vol.Required("passed"): bool,
        vol.Required("value"): vol.Any(None, float, int),
        vol.Required("tolerance"): vol.Any(None, float, int),
    }
)

MATRIX_OUT = [[float]]
NAMED_MATRIX = {vol.Required("vertices"): [str], vol.Required("matrix"): MATRIX_OUT}

OUTPUT_SCHEMAS: dict[str, vol.Schema] = {
    "membership": vol.Schema(
        {
            vol.Required("kernel"): str,
            vol.Required("target"): str,
            vol.Required("schedule"): str,
            vol.Required("values"): [float],
            vol.Required("subset_sizes"): [int],
            vol.Required("verdict"): vol.In(["converged", "diverged", "undecided"]),
            vol.Required("limit"): vol.Any(None, float),
        }
    ),
    "network": vol.Schema(
        {
            vol.Required("base"): str,
            vol.Required("emit"): vol.In(["dipoles", "kernel", "resistance", "laplacian"]),
            vol.Optional("dipoles"): {str: {str: float}},
            vol.Optional("kernel"): NAMED_MATRIX,
            vol.Optional("resistance"): NAMED_MATRIX,
            vol.Optional("laplacian"): NAMED_MATRIX,
        }
    ),
    "bridge-sample": vol.Schema(
        {
            vol.Required("grid"): [float],
            vol.Required("paths"): int,
            vol.Required("seed"): int,
            vol.Required("csv"): str,
            vol.Optional("empirical_covariance"): MATRIX_OUT,
            vol.Optional("analytic_covariance"): MATRIX_OUT,
            vol.Optional("max_z"): float,
        }
    ),
    "heat": vol.Schema(
        {
            vol.Required("check"): vol.Any(None, "semigroup", "green"),
            vol.Required("eigenvalues"): [float],
            vol.Required("heat_kernels"): [
                {vol.Required("t"): float, vol.Required("matrix"): MATRIX_OUT}
            ],
            vol.Optional("green"): MATRIX_OUT,
        }
    ),
}

JOB_RESULT_SCHEMA = vol.Schema(
    {
        vol.Required("schema_version"): SCHEMA_VERSION,
        vol.Required("command"): vol.In(list(OUTPUT_SCHEMAS)),
        vol.Required("inputs_digest"): vol.Match(r"^[0-9a-f]{64}$"),
        vol.Required("outputs"): dict,
        vol.Required("diagnostics"): [CHECK_SCHEMA],
    }
)


def validate_job_result(payload: dict[str, Any]) -> dict[str, Any]:
    """Validate a JobResult payload and its command-specific outputs."""
    try:
        JOB_RESULT_SCHEMA(payload)
        OUTPUT_SCHEMAS[payload["command"]](payload["outputs"])
    except vol.Invalid as err:
        raise ConsistencyError(f"JobResult does not match its schema: {err}") from err
    return payload
