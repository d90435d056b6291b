"""Structured check reports and run manifests.

A check never reduces to a bare boolean: it records the identity it
certifies (the anchor), the worst residual observed and the tolerance it
was held to. Canonical JSON is timing-free and sorted so that identical
runs are byte-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

PASS = "pass"
FAIL = "fail"
SKIPPED = "skipped"


@dataclass
class CheckReport:
    name: str
    anchor: str  # the identity or statement this check certifies
    status: str
    residual: float
    tolerance: float
    elapsed_ms: float = 0.0

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def to_dict(self, include_timing: bool = False) -> dict:
        out = {
            "name": self.name,
            "anchor": self.anchor,
            "status": self.status,
            "residual": self.residual,
            "tolerance": self.tolerance,
        }
        if include_timing:
            out["elapsed_ms"] = self.elapsed_ms
        return out


def make_check(name: str, anchor: str, residual: float, tol: float,
               skipped: bool = False) -> CheckReport:
    if not anchor:
        raise ValueError(f"check '{name}' has an empty anchor")
    residual = float(residual)
    if skipped:
        status = SKIPPED
    else:
        status = PASS if residual <= tol else FAIL
    return CheckReport(name=name, anchor=anchor, status=status,
                       residual=residual, tolerance=float(tol))


def all_passed(reports) -> bool:
    return all(r.status in (PASS, SKIPPED) for r in reports)


def worst(reports) -> float:
    vals = [r.residual for r in reports if r.status != SKIPPED]
    return max(vals) if vals else 0.0


def validate_reports(reports) -> None:
    """Self-validation: every emitted check must carry a nonempty anchor."""
    for r in reports:
        if not r.anchor:
            raise ValueError(f"check '{r.name}' carries an empty anchor")
        if r.status not in (PASS, FAIL, SKIPPED):
            raise ValueError(f"check '{r.name}' has invalid status '{r.status}'")


@dataclass
class RunManifest:
    command: str
    seed: int | None
    models: list[str]
    version: str
    reports: list[CheckReport] = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def to_json(self) -> str:
        validate_reports(self.reports)
        doc = {
            "command": self.command,
            "seed": self.seed,
            "models": sorted(self.models),
            "version": self.version,
            "checks": [r.to_dict() for r in
                       sorted(self.reports, key=lambda r: r.name)],
            "passed": all_passed(self.reports),
        }
        if self.extra:
            doc["extra"] = self.extra
        # timing is deliberately excluded: identical command + seed must
        # reproduce identical bytes
        return json.dumps(doc, sort_keys=True, indent=2)
