"""Pass/fail results that carry the evidence for a failure."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


@dataclass(frozen=True)
class Verdict:
    ok: bool
    reason: str = ""
    witness: Any = None
    details: dict = field(default_factory=dict, compare=False)

    def __bool__(self) -> bool:
        return self.ok

    @classmethod
    def passed(cls, **details) -> "Verdict":
        return cls(True, details=details)

    @classmethod
    def failed(cls, reason: str, witness: Any = None, **details) -> "Verdict":
        return cls(False, reason, witness, details)


def first_failure(verdicts) -> Verdict:
    """The first failing verdict, or a pass when there is none."""
    for v in verdicts:
        if not v:
            return v
    return Verdict.passed()
