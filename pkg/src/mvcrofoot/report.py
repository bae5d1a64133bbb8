"""Check records and suite reports emitted by the verification commands."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class CheckRecord:
    """One named residual check against the identity stated in ``anchor``."""

    name: str
    anchor: str
    residual: float
    tolerance: float

    def __post_init__(self):
        object.__setattr__(self, "residual", float(self.residual))
        object.__setattr__(self, "tolerance", float(self.tolerance))

    @property
    def passed(self) -> bool:
        return self.residual < self.tolerance

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "paper_anchor": self.anchor,
            "residual": float(self.residual),
            "tolerance": float(self.tolerance),
            "pass": self.passed,
        }


@dataclass(frozen=True)
class SuiteReport:
    suite: str
    checks: tuple[CheckRecord, ...]
    env: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def max_residual(self) -> float:
        return max((check.residual for check in self.checks), default=0.0)

    def as_dict(self) -> dict:
        return {
            "suite": self.suite,
            "checks": [check.as_dict() for check in self.checks],
            "pass": self.passed,
            "env": dict(self.env),
        }
