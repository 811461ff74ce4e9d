"""Structured pass/fail reports for protocol and property checks."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .diagram import Diagram
from .tensor import evaluate


@dataclass(frozen=True)
class Claim:
    name: str
    passed: bool
    deviation: float
    tolerance: float
    method: str = "numeric"  # "numeric" | "rewrite" | "structural"
    detail: str = ""

    @property
    def status(self) -> str:
        return "PASS" if self.passed else "FAIL"


@dataclass
class Report:
    title: str
    claims: list[Claim] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.claims)

    def add(self, claim: Claim) -> None:
        self.claims.append(claim)

    def render_text(self) -> str:
        """Tab-delimited rows: claim, status, deviation, tolerance, method."""
        lines = [f"# {self.title}"]
        lines.append("claim\tstatus\tdeviation\ttolerance\tmethod")
        for c in self.claims:
            lines.append(
                f"{c.name}\t{c.status}\t{c.deviation:.3e}\t{c.tolerance:.1e}\t{c.method}"
            )
        lines.append(f"# overall\t{'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        payload = {
            "title": self.title,
            "passed": self.passed,
            "claims": [
                {
                    "name": c.name,
                    "passed": c.passed,
                    "deviation": f"{c.deviation:.3e}",
                    "tolerance": c.tolerance,
                    "method": c.method,
                    "detail": c.detail,
                }
                for c in self.claims
            ],
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def max_deviation(d1: Diagram, d2: Diagram) -> float:
    """Largest entrywise distance between the two evaluations."""
    t1 = evaluate(d1).data
    t2 = evaluate(d2).data
    if t1.shape != t2.shape:
        return float("inf")
    if t1.size == 0:
        return 0.0
    return float(np.max(np.abs(t1 - t2)))


def scaled_deviation(d1: Diagram, d2: Diagram) -> float:
    """Deviation after rescaling d2 to best match d1 (for up-to-scalar
    claims); infinite when only one side is zero."""
    t1 = evaluate(d1).data.ravel()
    t2 = evaluate(d2).data.ravel()
    if t1.shape != t2.shape:
        return float("inf")
    n1, n2 = np.max(np.abs(t1)), np.max(np.abs(t2))
    if n1 < 1e-300 and n2 < 1e-300:
        return 0.0
    if n1 < 1e-300 or n2 < 1e-300:
        return float("inf")
    k = int(np.argmax(np.abs(t2)))
    lam = t1[k] / t2[k]
    return float(np.max(np.abs(t1 - lam * t2)))
