"""State files, run reports and atomic output.

States are JSON with complex entries as ``[re, im]`` pairs in the global
basis order (row-major for density matrices).  Scan tables are CSV.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DomainError
from .states import QuantumState

try:
    from importlib.metadata import version as _pkg_version

    VERSION = _pkg_version("artifact")
except Exception:  # pragma: no cover - running from a source tree
    VERSION = "0.1.0"


def state_to_dict(state: QuantumState, label: str | None = None, seed: dict | None = None) -> dict:
    flat = state.data.reshape(-1)
    d = {
        "dims": list(state.dims),
        "type": "pure" if state.is_pure else "mixed",
        "data": [[float(z.real), float(z.imag)] for z in flat],
    }
    if label is not None:
        d["label"] = label
    if seed is not None:
        d["seed"] = seed
    return d


def state_from_dict(d: dict) -> QuantumState:
    try:
        dims = [int(x) for x in d["dims"]]
        kind = d["type"]
        data = np.array([complex(re, im) for re, im in d["data"]])
    except (KeyError, TypeError, ValueError) as exc:
        raise DomainError(f"malformed state file: {exc}") from exc
    total = int(np.prod(dims))
    if kind == "pure":
        if data.size != total:
            raise DomainError(f"pure state file needs {total} entries, got {data.size}")
        return QuantumState.pure(data, dims)
    if kind == "mixed":
        if data.size != total * total:
            raise DomainError(f"mixed state file needs {total * total} entries, got {data.size}")
        return QuantumState.mixed(data.reshape(total, total), dims)
    raise DomainError(f"state type must be 'pure' or 'mixed', got {kind!r}")


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def dumps_state(state: QuantumState, label: str | None = None, seed: dict | None = None) -> str:
    return dumps(state_to_dict(state, label, seed))


def loads_state(text: str) -> QuantumState:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DomainError(f"state file is not valid JSON: {exc}") from exc
    return state_from_dict(d)


def load_state(path) -> QuantumState:
    return loads_state(Path(path).read_text())


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if hasattr(obj, "to_dict"):
        return _jsonable(obj.to_dict())
    return obj


def write_atomic(path, text: str) -> None:
    """Write ``text`` to ``path`` via a temporary file and rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent if str(path.parent) else ".", prefix=".tmp-", suffix=path.suffix)
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def scan_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["exponent", "worst_residual", "witness_id"])
    for r in rows:
        w.writerow([repr(float(r["exponent"])), repr(float(r["worst_residual"])), r["witness_id"]])
    return buf.getvalue()


@dataclass
class RunReport:
    command: list
    seed: int
    payload_type: str
    payload: object
    wall_time: float = 0.0
    version: str = VERSION
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "command": list(self.command),
            "seed": self.seed,
            "version": self.version,
            "wall_time": self.wall_time,
            "payload_type": self.payload_type,
            "payload": _jsonable(self.payload),
        }

    def payload_json(self) -> str:
        """Canonical payload text; reruns from the echoed command match it byte for byte."""
        return dumps(self.payload)

    def dumps(self) -> str:
        return dumps(self.to_dict())
