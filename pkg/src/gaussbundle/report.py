"""Deterministic JSON and CSV reports of named checks."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

CSV_COLUMNS = ("name", "value", "rhs", "tolerance", "se", "pass")


@dataclass
class Check:
    """One named result. ``passed`` is None for plain computed values."""

    name: str
    value: float
    rhs: Optional[float] = None
    tolerance: Optional[float] = None
    se: Optional[float] = None
    passed: Optional[bool] = None
    note: str = ""

    def as_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"name": self.name, "value": self.value}
        if self.rhs is not None:
            out["rhs"] = self.rhs
        if self.tolerance is not None:
            out["tolerance"] = self.tolerance
        if self.se is not None:
            out["se"] = self.se
        if self.passed is not None:
            out["pass"] = bool(self.passed)
        if self.note:
            out["note"] = self.note
        return out

    def describe(self) -> str:
        parts = [f"{self.name}: value={_fmt(self.value)}"]
        if self.rhs is not None:
            parts.append(f"rhs={_fmt(self.rhs)}")
        if self.tolerance is not None:
            parts.append(f"tol={_fmt(self.tolerance)}")
        if self.se is not None:
            parts.append(f"se={_fmt(self.se)}")
        if self.note:
            parts.append(self.note)
        return " ".join(parts)


def equal_check(name: str, value: float, rhs: float, tol: float, note: str = "") -> Check:
    return Check(name, float(value), float(rhs), float(tol), passed=bool(abs(value - rhs) <= tol), note=note)


def le_check(name: str, lhs: float, rhs: float, tol: float, note: str = "") -> Check:
    return Check(name, float(lhs), float(rhs), float(tol), passed=bool(lhs <= rhs + tol), note=note)


def _fmt(x: float) -> str:
    if x is None:
        return "null"
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    x = float(x)
    if not math.isfinite(x):
        return "null"
    return format(x, ".17g")


def _encode(obj: Any) -> str:
    if obj is None or isinstance(obj, (bool, int, float)):
        return _fmt(obj)
    if hasattr(obj, "item") and callable(obj.item):  # numpy scalars
        return _encode(obj.item())
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


@dataclass
class Report:
    command: str
    params: Dict[str, Any]
    seed: int
    results: List[Check] = field(default_factory=list)
    versions: Dict[str, str] = field(default_factory=dict)
    elapsed_ms: Optional[float] = None

    @property
    def passed(self) -> bool:
        return all(c.passed is not False for c in self.results)

    def failures(self) -> List[Check]:
        return [c for c in self.results if c.passed is False]

    def as_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "command": self.command,
            "params": self.params,
            "seed": self.seed,
            "versions": self.versions,
            "results": [c.as_dict() for c in self.results],
        }
        if self.elapsed_ms is not None:
            out["elapsed_ms"] = self.elapsed_ms
        return out

    def to_json(self) -> str:
        """Stable key order and 17-significant-digit floats; non-finite floats become null."""
        return _encode(self.as_dict()) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for c in self.results:
            d = c.as_dict()
            writer.writerow(["" if d.get(k) is None else (_fmt(d[k]) if k != "name" else d[k]) for k in CSV_COLUMNS])
        return buf.getvalue()
