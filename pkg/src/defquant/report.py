"""Pass/fail bookkeeping shared by the checks and the suite runner."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List

#: how many failing cases a report keeps verbatim
MAX_RECORDED = 5


@dataclass
class CheckReport:
    name: str
    checked: int = 0
    failures: List[str] = field(default_factory=list)
    failed: int = 0

    @property
    def ok(self) -> bool:
        return self.failed == 0

    @property
    def passed(self) -> int:
        return self.checked - self.failed

    def record(self, ok: bool, what: str = ""):
        self.checked += 1
        if not ok:
            self.failed += 1
            if len(self.failures) < MAX_RECORDED:
                self.failures.append(what)

    def summary(self) -> str:
        status = "ok" if self.ok else "FAIL"
        return f"{self.name}: {self.passed}/{self.checked} {status}"

    def as_dict(self) -> dict:
        return {"name": self.name, "checked": self.checked, "passed": self.passed,
                "ok": self.ok, "failures": list(self.failures)}
