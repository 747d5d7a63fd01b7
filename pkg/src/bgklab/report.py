"""Structured experiment records and their deterministic serialization.

Reports carry the computed quantities and the asserted inequalities of one
experiment. Serialization is byte-stable: JSON keys are sorted and every
float is rendered with exactly 12 significant digits (never the platform's
shortest-round-trip repr), so identical configs produce identical bytes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

SCHEMA_VERSION = "1"


def format_float(x: float) -> str:
    """Render a float with 12 significant digits; '-0' normalizes to '0'."""
    if math.isnan(x):
        return '"NaN"'
    if math.isinf(x):
        return '"Infinity"' if x > 0 else '"-Infinity"'
    text = f"{x:.12g}"
    if text == "-0":
        text = "0"
    return text


def dumps_stable(obj: Any) -> str:
    """Deterministic JSON text: sorted keys, fixed float formatting."""
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format_float(obj)
    if isinstance(obj, dict):
        items = sorted(obj.items(), key=lambda kv: kv[0])
        inner = ",".join(f"{json.dumps(k)}:{dumps_stable(v)}" for k, v in items)
        return "{" + inner + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(dumps_stable(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


@dataclass
class Assertion(object):
    """One asserted relation: `lhs relation rhs`, with its outcome."""

    name: str
    lhs: Any
    rhs: Any
    relation: str
    passed: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "relation": self.relation,
            "pass": self.passed,
        }


@dataclass
class Report(object):
    """Experiment record: inputs, quantities, assertions, warnings, trace."""

    command: str
    inputs: Dict[str, Any] = field(default_factory=dict)
    quantities: Dict[str, Any] = field(default_factory=dict)
    assertions: List[Assertion] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)
    trace: Optional[List[Any]] = None
    schema_version: str = SCHEMA_VERSION

    @property
    def passed(self) -> bool:
        return all(a.passed for a in self.assertions)

    def note(self, name: str, value: Any) -> None:
        self.quantities[name] = value

    def warn(self, message: str) -> None:
        self.warnings.append(message)

    def check(self, name: str, lhs: Any, relation: str, rhs: Any, tol: float = 0.0) -> bool:
        """Record an assertion row; numeric relations honor an absolute slack `tol`."""
        if relation == "<=":
            ok = lhs <= rhs + tol
        elif relation == ">=":
            ok = lhs >= rhs - tol
        elif relation == "==":
            ok = (lhs == rhs) if tol == 0.0 else abs(lhs - rhs) <= tol
        elif relation == "abs<=":
            ok = abs(lhs) <= rhs + tol
        else:
            raise ValueError(f"unknown relation {relation!r}")
        self.assertions.append(Assertion(name, lhs, rhs, relation, bool(ok)))
        return bool(ok)

    def merge(self, other: "Report", prefix: str = "") -> None:
        """Fold another report's rows into this one, optionally prefixing names."""
        for k, v in other.quantities.items():
            self.quantities[prefix + k] = v
        for a in other.assertions:
            self.assertions.append(
                Assertion(prefix + a.name, a.lhs, a.rhs, a.relation, a.passed)
            )
        self.warnings.extend(other.warnings)

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "schema_version": self.schema_version,
            "command": self.command,
            "inputs": self.inputs,
            "quantities": self.quantities,
            "assertions": [a.to_dict() for a in self.assertions],
            "warnings": list(self.warnings),
            "pass": self.passed,
        }
        if self.trace is not None:
            out["trace"] = self.trace
        return out

    def to_json(self) -> str:
        return dumps_stable(self.to_dict()) + "\n"

    def to_json_bytes(self) -> bytes:
        return self.to_json().encode("utf-8")


def write_csv(path_or_handle, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    """CSV text with LF endings and 12-significant-digit floats; also writes
    to `path_or_handle` when it is not None."""
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for v in row:
            if isinstance(v, bool):
                cells.append("true" if v else "false")
            elif isinstance(v, float):
                cells.append(format_float(v))
            else:
                cells.append(str(v))
        lines.append(",".join(cells))
    text = "\n".join(lines) + "\n"
    if path_or_handle is not None:
        if hasattr(path_or_handle, "write"):
            path_or_handle.write(text)
        else:
            with open(path_or_handle, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
    return text
