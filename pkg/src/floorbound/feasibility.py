"""Verdict objects returned by the point and layout checkers."""
from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Violation:
    constraint: str   # constraint family or row name, e.g. "2f" or "R1"
    detail: str       # which instance of the family (pair, axis, ...)
    amount: object    # how far the row is from being satisfied, > tol


@dataclass
class FeasibilityVerdict:
    violations: list[Violation] = field(default_factory=list)

    @property
    def feasible(self) -> bool:
        return not self.violations

    def constraints(self) -> set[str]:
        return {v.constraint for v in self.violations}

    def worst(self):
        if not self.violations:
            return 0
        return max(v.amount for v in self.violations)

    def __bool__(self) -> bool:
        return self.feasible
