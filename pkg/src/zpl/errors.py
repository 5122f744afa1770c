from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


class ZPLError(ValueError):
    """Error carrying a stable machine-readable code."""

    def __init__(self, code: str, message: str = "", **details: Any) -> None:
        self.code = code
        self.details = details
        super().__init__(f"{code}: {message}" if message else code)


@dataclass(frozen=True)
class Issue:
    code: str
    where: str
    detail: str = ""

    def __str__(self) -> str:
        return f"{self.code} at {self.where}" + (f": {self.detail}" if self.detail else "")


@dataclass
class Report:
    """Violations make a report fail; warnings do not."""

    violations: list[Issue] = field(default_factory=list)
    warnings: list[Issue] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, code: str, where: str, detail: str = "") -> None:
        self.violations.append(Issue(code, where, detail))

    def warn(self, code: str, where: str, detail: str = "") -> None:
        self.warnings.append(Issue(code, where, detail))

    def codes(self) -> set[str]:
        return {i.code for i in self.violations}

    def extend(self, other: "Report") -> None:
        self.violations.extend(other.violations)
        self.warnings.extend(other.warnings)
