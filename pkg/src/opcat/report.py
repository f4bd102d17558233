"""Validation findings.

Every ``validate_*`` function returns a :class:`ValidationReport` listing all
violations it found, in a deterministic order, rather than stopping at the
first one.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable


@dataclass(frozen=True)
class Finding:
    code: str
    subject: str
    message: str = field(default="", compare=False)

    @property
    def key(self) -> str:
        return f"{self.code}:{self.subject}"

    def to_dict(self) -> dict:
        return {"code": self.code, "subject": self.subject, "message": self.message}

    def __str__(self) -> str:
        return f"[{self.code}] {self.subject}: {self.message}" if self.message else f"[{self.code}] {self.subject}"


@dataclass(frozen=True)
class ValidationReport:
    findings: tuple[Finding, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.findings

    def __len__(self) -> int:
        return len(self.findings)

    def __iter__(self):
        return iter(self.findings)

    def codes(self) -> list[str]:
        return [f.code for f in self.findings]

    def keys(self) -> list[str]:
        return [f.key for f in self.findings]

    def of(self, code: str) -> list[Finding]:
        return [f for f in self.findings if f.code == code]

    def to_dict(self) -> dict:
        return {"ok": self.ok, "findings": [f.to_dict() for f in self.findings]}

    @classmethod
    def merge(cls, reports: Iterable["ValidationReport"]) -> "ValidationReport":
        out: list[Finding] = []
        for r in reports:
            out.extend(r.findings)
        return cls(tuple(out))
