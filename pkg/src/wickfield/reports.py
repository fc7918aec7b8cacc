"""Structured records for inequality checks and run metadata."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

SCHEMA_VERSION = 1

FLAG_SLACK = 1e-12


@dataclass
class BoundReport:
    """One inequality check: LHS, RHS, their ratio, and witness arguments."""

    inequality_id: str
    lhs: float
    rhs: float
    witnesses: dict = field(default_factory=dict)

    @property
    def ratio(self) -> float:
        if self.rhs == 0:
            return math.inf if self.lhs > 0 else 0.0
        return self.lhs / self.rhs

    @property
    def flag(self) -> bool:
        return self.lhs <= self.rhs * (1 + FLAG_SLACK)

    def to_record(self) -> dict:
        rec = {
            "schema_version": SCHEMA_VERSION,
            "id": self.inequality_id,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "ratio": self.ratio,
            "flag": self.flag,
            "witnesses": _jsonable(self.witnesses),
        }
        return rec

    def to_json(self) -> str:
        return json.dumps(self.to_record(), sort_keys=True)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if hasattr(obj, "item"):  # numpy scalars
        return _jsonable(obj.item())
    return obj
