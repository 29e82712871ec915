"""Verification reports, run configuration and deterministic serialization."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

from .errors import ConfigError


@dataclass
class VerificationReport:
    check_name: str
    parameters: dict[str, Any]
    passed: bool
    constants: dict[str, Any] = field(default_factory=dict)
    witnesses: list[dict[str, Any]] = field(default_factory=list)
    runtime_ms: int = 0

    def to_dict(self, include_runtime: bool = False) -> dict[str, Any]:
        out = {
            "check_name": self.check_name,
            "parameters": self.parameters,
            "pass": bool(self.passed),
            "constants": self.constants,
            "witnesses": self.witnesses,
        }
        if include_runtime:
            out["runtime_ms"] = int(self.runtime_ms)
        return out

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "VerificationReport":
        return cls(
            check_name=d["check_name"],
            parameters=d["parameters"],
            passed=d["pass"],
            constants=d.get("constants", {}),
            witnesses=d.get("witnesses", []),
            runtime_ms=d.get("runtime_ms", 0),
        )


# --------------------------------------------------------------------------
# serialization


def _plain(x):
    """Convert numpy scalars/arrays, Fractions and tuples to JSON-ready values."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_plain(v) for v in x.tolist()]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    return x


def _encode(x) -> str:
    if isinstance(x, dict):
        return "{" + ", ".join(f"{json.dumps(k)}: {_encode(v)}" for k, v in x.items()) + "}"
    if isinstance(x, list):
        return "[" + ", ".join(_encode(v) for v in x) + "]"
    if isinstance(x, bool) or x is None:
        return json.dumps(x)
    if isinstance(x, float):
        if math.isnan(x):
            return "NaN"
        if math.isinf(x):
            return "Infinity" if x > 0 else "-Infinity"
        return format(x, ".17g") if x != int(x) or abs(x) >= 1e16 else repr(x)
    return json.dumps(x)


def dumps(obj) -> str:
    """Stable JSON: insertion-ordered keys, floats at 17 significant digits."""
    return _encode(_plain(obj))


def emit(reports, fmt: str = "json", include_runtime: bool = False) -> bytes:
    dicts = [r.to_dict(include_runtime) for r in reports]
    if fmt == "json":
        return (dumps(dicts) + ("\n" if dicts else "")).encode() if dicts else b"[]"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["check_name", "pass", "kind", "index", "payload"])
        for d in dicts:
            const = {k: v for k, v in d["constants"].items() if k != "bins"}
            w.writerow([d["check_name"], d["pass"], "summary", 0, dumps(const)])
            for i, b in enumerate(d["constants"].get("bins", [])):
                w.writerow([d["check_name"], d["pass"], "bin", i, dumps(b)])
            for i, wit in enumerate(d["witnesses"]):
                w.writerow([d["check_name"], d["pass"], "witness", i, dumps(wit)])
        return buf.getvalue().encode()
    if fmt == "text":
        lines = []
        for d in dicts:
            flag = "PASS" if d["pass"] else "FAIL"
            scalars = ", ".join(
                f"{k}={format(v, '.6g') if isinstance(v, float) else v}"
                for k, v in _plain(d["constants"]).items()
                if isinstance(v, (int, float, str, bool))
            )
            lines.append(f"{flag} {d['check_name']}: {scalars}")
        return ("\n".join(lines) + "\n").encode() if lines else b""
    raise ConfigError(f"format: unknown output format {fmt!r}")


def parse(data: bytes) -> list[VerificationReport]:
    return [VerificationReport.from_dict(d) for d in json.loads(data.decode())]
