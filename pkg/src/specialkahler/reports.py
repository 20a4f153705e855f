"""Check records, suite reports and deterministic serialization."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Optional

import numpy as np


@dataclass(frozen=True)
class Check:
    """One named numerical check.

    ``relation`` is "le" (value must not exceed tol), "ge" (value must reach
    tol), "in" (value inside the closed interval tol = (lo, hi)) or "eq".
    """

    name: str
    value: Any
    tol: Any
    relation: str = "le"

    @property
    def passed(self) -> bool:
        v, t = self.value, self.tol
        if self.relation == "le":
            return bool(np.isfinite(v) and v <= t)
        if self.relation == "ge":
            return bool(np.isfinite(v) and v >= t)
        if self.relation == "in":
            return bool(np.isfinite(v) and t[0] <= v <= t[1])
        if self.relation == "eq":
            return v == t
        raise ValueError(self.relation)

    def as_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "tol": self.tol, "pass": self.passed}


@dataclass
class Report:
    suite: str
    config: dict
    checks: list[Check] = field(default_factory=list)
    seed: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, value, tol, relation: str = "le") -> Check:
        c = Check(name, value, tol, relation)
        self.checks.append(c)
        return c

    def extend(self, checks: Iterable[Check]) -> None:
        self.checks.extend(checks)

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def as_dict(self) -> dict:
        out = {"suite": self.suite, "config": self.config,
               "checks": [c.as_dict() for c in self.checks],
               "pass": self.passed, "seed": self.seed}
        if self.extra:
            out["data"] = self.extra
        return out

    def to_json(self) -> str:
        return dumps(self.as_dict())


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    if x == int(x) and abs(x) < 1e16:
        return f"{x:.1f}"
    return f"{x:.17g}"


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist(), indent, level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, set, frozenset)):
        seq = sorted(obj) if isinstance(obj, (set, frozenset)) else list(obj)
        if not seq:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in seq):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in seq) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in seq]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if hasattr(obj, "__dict__"):
        return _encode(vars(obj), indent, level)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """JSON with every float written to 17 significant digits."""
    return _encode(obj, indent, 0) + "\n"


def csv_table(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt_float(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def max_abs(x: Optional[np.ndarray]) -> float:
    return float(np.max(np.abs(x))) if x is not None and np.size(x) else 0.0
