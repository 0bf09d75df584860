"""Pass/fail records for inequality audits."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .errors import NotApplicable


@dataclass(frozen=True)
class AuditReport:
    """A one-sided claim ``lhs >= rhs``; passes when ``lhs - rhs >= -tol``.

    Composite reports carry their sub-checks in ``parts`` and take ``lhs``/``rhs``
    from the binding (smallest-margin) part.
    """

    claim: str
    inputs: dict
    lhs: float
    rhs: float
    tol: float
    notes: str = ""
    parts: tuple = field(default=())

    @property
    def margin(self) -> float:
        return self.lhs - self.rhs

    @property
    def passed(self) -> bool:
        own = self.margin >= -self.tol or (math.isinf(self.lhs) and self.lhs > 0)
        return own and all(p.passed for p in self.parts)

    def to_dict(self) -> dict:
        d = {
            "claim": self.claim,
            "inputs": self.inputs,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "tol": self.tol,
            "pass": self.passed,
        }
        if self.notes:
            d["notes"] = self.notes
        if self.parts:
            d["parts"] = [p.to_dict() for p in self.parts]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), default=str)


def check(claim, inputs, lhs, rhs, tol, notes="") -> AuditReport:
    return AuditReport(claim, dict(inputs), float(lhs), float(rhs), float(tol), notes)


def combine(claim, inputs, parts, tol, notes="") -> AuditReport:
    """Composite report; raises :class:`NotApplicable` when no part applies."""
    parts = tuple(p for p in parts if p is not None)
    if not parts:
        raise NotApplicable(f"{claim}: no sub-check applies to {inputs}")
    worst = min(parts, key=lambda p: p.margin)
    return AuditReport(claim, dict(inputs), worst.lhs, worst.rhs, float(tol), notes, parts)


def worst_of(claim, inputs, items, tol, notes=""):
    """Aggregate many ``(label, lhs, rhs)`` instances of one inequality into a single check."""
    items = list(items)
    if not items:
        return None
    label, lhs, rhs = min(items, key=lambda it: it[1] - it[2])
    extra = f"binding at {label}; {len(items)} instances"
    return check(claim, inputs, lhs, rhs, tol, f"{notes}; {extra}" if notes else extra)
