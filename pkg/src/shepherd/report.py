"""Findings and reports shared by tree, manifest, and deep validation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

SEVERITIES = ("error", "warning", "info")


@dataclass(frozen=True)
class Finding:
    severity: str
    code: str
    message: str
    location: str = ""

    def __post_init__(self) -> None:
        if self.severity not in SEVERITIES:
            raise ValueError(f"unknown severity: {self.severity!r}")

    def as_dict(self) -> dict:
        return {
            "severity": self.severity,
            "code": self.code,
            "message": self.message,
            "location": self.location,
        }


@dataclass
class ValidationReport:
    findings: list[Finding] = field(default_factory=list)

    def add(self, severity: str, code: str, message: str, location: str = "") -> None:
        self.findings.append(Finding(severity, code, message, location))

    def error(self, code: str, message: str, location: str = "") -> None:
        self.add("error", code, message, location)

    def warning(self, code: str, message: str, location: str = "") -> None:
        self.add("warning", code, message, location)

    def info(self, code: str, message: str, location: str = "") -> None:
        self.add("info", code, message, location)

    def extend(self, other: "ValidationReport") -> None:
        self.findings.extend(other.findings)

    @property
    def is_clean(self) -> bool:
        """True when no error-severity finding is present."""
        return not any(f.severity == "error" for f in self.findings)

    def errors(self) -> list[Finding]:
        return [f for f in self.findings if f.severity == "error"]

    def codes(self) -> list[str]:
        return [f.code for f in self.findings]

    def as_dicts(self) -> list[dict]:
        return [f.as_dict() for f in self.findings]

    def __iter__(self) -> Iterator[Finding]:
        return iter(self.findings)

    def __len__(self) -> int:
        return len(self.findings)
