"""Verification reports and deterministic parallel sweeps."""

from __future__ import annotations

import enum
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")


class Status(enum.Enum):
    PASS = "pass"
    FAIL = "fail"
    INDETERMINATE = "indeterminate"


@dataclass
class Check:
    """One named assertion evaluated over ``count`` cases."""

    name: str
    count: int = 0
    failures: list[dict[str, Any]] = field(default_factory=list)
    undecided: list[dict[str, Any]] = field(default_factory=list)

    @property
    def status(self) -> Status:
        if self.failures:
            return Status.FAIL
        if self.undecided:
            return Status.INDETERMINATE
        return Status.PASS

    def record(self, ok: bool | None, **witness: Any) -> bool | None:
        """Count a case; ``ok=None`` means the sign could not be certified."""
        self.count += 1
        if ok is None:
            self.undecided.append(witness)
        elif not ok:
            self.failures.append(witness)
        return ok

    def merge(self, other: Check) -> None:
        self.count += other.count
        self.failures.extend(other.failures)
        self.undecided.extend(other.undecided)


@dataclass
class VerificationReport:
    name: str
    mode: str
    checks: dict[str, Check] = field(default_factory=dict)
    observations: dict[str, Any] = field(default_factory=dict)
    # highest-precision arithmetic actually needed (after ladder escalation)
    modes_used: set[str] = field(default_factory=set)

    def check(self, name: str) -> Check:
        if name not in self.checks:
            self.checks[name] = Check(name)
        return self.checks[name]

    @property
    def status(self) -> Status:
        statuses = {c.status for c in self.checks.values()}
        if Status.FAIL in statuses:
            return Status.FAIL
        if Status.INDETERMINATE in statuses:
            return Status.INDETERMINATE
        return Status.PASS

    @property
    def passed(self) -> bool:
        return self.status is Status.PASS

    def witnesses(self) -> list[dict[str, Any]]:
        out = []
        for c in self.checks.values():
            out.extend({"check": c.name, "outcome": "fail", **w} for w in c.failures)
            out.extend({"check": c.name, "outcome": "indeterminate", **w} for w in c.undecided)
        return out

    def merge(self, other: VerificationReport) -> None:
        for name, c in other.checks.items():
            self.check(name).merge(c)
        self.modes_used |= other.modes_used

    def summary(self) -> str:
        lines = [f"{self.name} [{self.mode}]: {self.status.value}"]
        for c in self.checks.values():
            lines.append(f"  {c.name}: {c.status.value} ({c.count} cases, {len(c.failures)} failures)")
        return "\n".join(lines)


def sweep(fn: Callable[[T], R], items: Iterable[T], workers: int = 1) -> list[R]:
    """Map ``fn`` over ``items`` in order; results never depend on ``workers``."""
    items = list(items)
    if workers <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    chunk = max(1, len(items) // (workers * 8))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=chunk))


def combine(name: str, mode: str, parts: Sequence[VerificationReport]) -> VerificationReport:
    out = VerificationReport(name, mode)
    for p in parts:
        out.merge(p)
    return out
