"""JobResult assembly, diagnostic checks and atomic output for graph-rkhs."""

from __future__ import annotations

from dataclasses import dataclass, field
import hashlib
import json
import logging
import os
from pathlib import Path
import tempfile
from typing import Any

import numpy as np

from .const import SCHEMA_VERSION
from .schemas import validate_job_result

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class Check:
    """One named diagnostic: a measured value against its tolerance."""

    check_name: str
    passed: bool
    value: float | None = None
    tolerance: float | None = None

    @classmethod
    def at_most(cls, check_name: str, value: float, tolerance: float) -> Check:
        """Check that passes when value ≤ tolerance."""
        return cls(check_name, bool(value <= tolerance), float(value), float(tolerance))


@dataclass
class JobResult:
    """Machine-readable result of one CLI command."""

    command: str
    inputs_digest: str
    outputs: dict[str, Any]
    diagnostics: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        """True when every diagnostic passed."""
        return all(check.passed for check in self.diagnostics)

    def as_dict(self) -> dict[str, Any]:
        """Return the validated JSON payload."""
        payload = {
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "inputs_digest": self.inputs_digest,
            "outputs": jsonable(self.outputs),
            "diagnostics": [
                {
                    "check_name": check.check_name,
                    "passed": check.passed,
                    "value": check.value,
                    "tolerance": check.tolerance,
                }
                for check in self.diagnostics
            ],
        }
        return validate_job_result(payload)

    def to_json(self) -> str:
        """Serialize with shortest round-trip floats."""
        return json.dumps(self.as_dict(), indent=2)


def jsonable(value: Any) -> Any:
    """Convert numpy arrays and scalars inside a value to plain Python."""
    if isinstance(value, dict):
        return {str(key): jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def inputs_digest(command: str, inputs: dict[str, Any]) -> str:
    """Return the sha256 of the canonical JSON of a command and its inputs."""
    canonical = json.dumps(
        {"command": command, "inputs": jsonable(inputs)},
        sort_keys=True,
        separators=(",", ":"),
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def atomic_write_text(path: Path | str, text: str) -> None:
    """Write text next to the target, then rename it into place."""
    target = Path(path)
    fd, temporary = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        Path(temporary).replace(target)
    except BaseException:
        Path(temporary).unlink(missing_ok=True)
        raise
    _LOGGER.debug(f"Wrote {len(text)} characters to {target}")
