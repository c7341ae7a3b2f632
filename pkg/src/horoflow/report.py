"""Deterministic JSON check reports.

Schema (version 1): a config echo, a list of per-check records
{name, paperRef, bound, observed, margin, passed}, and a summary.
Records keep insertion order; numbers are emitted as floats, so a fixed
(seed, precision, config) triple produces byte-identical output.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

from mpmath import mpf

from .plane import BoundaryPoint, Point, UnitTangent

SCHEMA_VERSION = 1


def jsonable(value) -> Any:
    """Mapping of package values onto stable JSON primitives."""
    if value is None or isinstance(value, (bool, int, str)):
        return value
    if isinstance(value, float):
        return value
    if isinstance(value, mpf):
        return float(value)
    if isinstance(value, BoundaryPoint):
        return "inf" if value.is_infinite else float(value.value)
    if isinstance(value, Point):
        return {"x": float(value.x), "y": float(value.y)}
    if isinstance(value, UnitTangent):
        return {"base": jsonable(value.base), "forward": jsonable(value.forward)}
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    raise TypeError(f"cannot serialize {type(value).__name__}")


@dataclass
class CheckRecord:
    name: str
    paper_ref: str
    bound: Any
    observed: Any
    passed: bool
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        bound = jsonable(self.bound)
        observed = jsonable(self.observed)
        margin = None
        if isinstance(bound, (int, float)) and isinstance(observed, (int, float)):
            margin = bound - observed
        record = {
            "name": self.name,
            "paperRef": self.paper_ref,
            "bound": bound,
            "observed": observed,
            "margin": margin,
            "passed": bool(self.passed),
        }
        if self.extra:
            record["extra"] = jsonable(self.extra)
        return record


class ReportBuilder:
    def __init__(self, command: str, config: dict):
        self.command = command
        self.config = config
        self.records: list[CheckRecord] = []

    def add(self, name, paper_ref, bound, observed, passed, **extra) -> CheckRecord:
        record = CheckRecord(
            name=name,
            paper_ref=paper_ref,
            bound=bound,
            observed=observed,
            passed=bool(passed),
            extra=extra,
        )
        self.records.append(record)
        return record

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.records)

    def to_dict(self) -> dict:
        failed = sum(1 for r in self.records if not r.passed)
        return {
            "schemaVersion": SCHEMA_VERSION,
            "command": self.command,
            "config": jsonable(self.config),
            "checks": [r.to_dict() for r in self.records],
            "summary": {
                "total": len(self.records),
                "passed": len(self.records) - failed,
                "failed": failed,
            },
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=2) + "\n"

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.dumps())
