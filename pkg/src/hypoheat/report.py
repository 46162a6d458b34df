"""Check results, suite reports and their byte-stable serialization.

Floats are written with 17 significant digits so they reload exactly, and
exact rationals travel as "p/q" strings. Runtimes stay on the objects for the
human table but are left out of the canonical output, so a rerun with the
same inputs gives byte-identical bytes.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from numbers import Rational
from typing import Any

import numpy as np

from ._rational import fmt_number


def plain(value: Any) -> Any:
    """Convert numpy/Fraction containers into JSON-ready values."""
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, Rational):
        return fmt_number(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, np.ndarray):
        return [plain(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    if hasattr(value, "to_dict"):
        return plain(value.to_dict())
    raise TypeError(f"cannot serialize {type(value).__name__}")


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    runtime: float = field(default=0.0, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "details", plain(self.details))
        object.__setattr__(self, "passed", bool(self.passed))

    def to_dict(self) -> dict:
        return {"name": self.name, "pass": self.passed, "details": self.details}


@dataclass(frozen=True)
class SuiteReport:
    name: str
    checks: tuple
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "checks", tuple(self.checks))
        object.__setattr__(self, "config", plain(self.config))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "pass": self.passed,
            "config": self.config,
            "checks": [c.to_dict() for c in self.checks],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SuiteReport":
        checks = tuple(CheckResult(c["name"], c["pass"], c.get("details", {})) for c in d["checks"])
        return cls(d["name"], checks, d.get("config", {}))

    @classmethod
    def from_json(cls, data) -> "SuiteReport":
        if isinstance(data, bytes):
            data = data.decode("utf-8")
        return cls.from_dict(json.loads(data, parse_constant=_parse_constant))

    def table(self) -> str:
        """Human-readable summary, one line per check (runtimes included)."""
        width = max([len(c.name) for c in self.checks] + [5])
        lines = [f"{'check'.ljust(width)}  status  runtime"]
        for c in self.checks:
            lines.append(f"{c.name.ljust(width)}  {'PASS' if c.passed else 'FAIL':6}  {c.runtime:8.2f}s")
            for key in ("lhs", "rhs", "se", "margin"):
                if key in c.details:
                    lines[-1] += f"  {key}={_fmt_float(c.details[key])}"
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)


def _parse_constant(name: str):
    return {"NaN": math.nan, "Infinity": math.inf, "-Infinity": -math.inf}[name]


def _fmt_float(v) -> str:
    if isinstance(v, float):
        if math.isnan(v):
            return "NaN"
        if math.isinf(v):
            return "Infinity" if v > 0 else "-Infinity"
        text = format(v, ".17g")
        # keep a float marker so the value reloads as a float
        return text if any(ch in text for ch in ".en") else text + ".0"
    return str(v)


def _encode(value) -> str:
    if value is None:
        return "null"
    if value is True:
        return "true"
    if value is False:
        return "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return _fmt_float(value)
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in value.items()) + "}"
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_encode(v) for v in value) + "]"
    raise TypeError(f"cannot encode {type(value).__name__}")


CSV_FIELDS = ("name", "pass", "lhs", "rhs", "se", "margin")


def emit_report(report: SuiteReport, format: str = "json") -> bytes:
    if format == "json":
        return (_encode(report.to_dict()) + "\n").encode("utf-8")
    if format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_FIELDS)
        for c in report.checks:
            row = [c.name, "PASS" if c.passed else "FAIL"]
            row += [_fmt_float(c.details[k]) if k in c.details else "" for k in CSV_FIELDS[2:]]
            writer.writerow(row)
        return buf.getvalue().encode("utf-8")
    raise ValueError(f"unknown format {format!r}; expected json or csv")


def check_from_inequality(report, criterion: str = "") -> CheckResult:
    """Wrap an estimators.InequalityReport."""
    name = f"{criterion}:{report.name}" if criterion else report.name
    return CheckResult(name, report.passed, report.to_dict(), runtime=report.runtime)

