"""Check results: the one record type every numerical certification emits."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field


class CheckKind(str, enum.Enum):
    IDENTITY = "identity"
    INEQUALITY = "inequality"


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one identity or inequality check.

    scale = max(|lhs|, |rhs|, 1). Identities pass iff |lhs - rhs| <=
    tolerance * scale; inequalities pass iff lhs <= rhs + tolerance * scale.
    slack is |lhs - rhs| for identities and rhs - lhs for inequalities.
    """

    name: str
    lhs: float
    rhs: float
    kind: CheckKind
    slack: float
    tolerance: float
    passed: bool
    witness: int | None = None
    info: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "kind": self.kind.value,
            "slack": self.slack,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }
        if self.witness is not None:
            d["witness"] = self.witness
        if self.info:
            d["info"] = self.info
        return d


def _scale(lhs: float, rhs: float) -> float:
    return max(abs(lhs), abs(rhs), 1.0)


def identity_check(name, lhs, rhs, tolerance, witness=None, info=None) -> CheckResult:
    lhs, rhs = float(lhs), float(rhs)
    err = abs(lhs - rhs)
    return CheckResult(
        name=name,
        lhs=lhs,
        rhs=rhs,
        kind=CheckKind.IDENTITY,
        slack=err,
        tolerance=float(tolerance),
        passed=bool(err <= tolerance * _scale(lhs, rhs)),
        witness=witness,
        info=info or {},
    )


def inequality_check(name, lhs, rhs, tolerance, witness=None, info=None) -> CheckResult:
    lhs, rhs = float(lhs), float(rhs)
    return CheckResult(
        name=name,
        lhs=lhs,
        rhs=rhs,
        kind=CheckKind.INEQUALITY,
        slack=rhs - lhs,
        tolerance=float(tolerance),
        passed=bool(lhs <= rhs + tolerance * _scale(lhs, rhs)),
        witness=witness,
        info=info or {},
    )
