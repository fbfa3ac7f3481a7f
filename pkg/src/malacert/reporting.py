"""Pass/fail records for numerical checks.

Every check that samples anything records its seed so a failure can be
replayed from (name, seed) alone.  Failures carry a witness: the concrete
inputs at which the checked inequality was violated.
"""

from __future__ import annotations

from dataclasses import dataclass, field


PASS = "pass"
FAIL = "fail"
SKIPPED = "skipped"


@dataclass
class CheckResult:
    """Outcome of one numerical check.

    worst_margin is the smallest observed slack of the checked inequality
    (bound minus observed value); negative means violated.
    """

    name: str
    status: str
    worst_margin: float = float("inf")
    witness: dict | None = None
    n_samples: int = 0
    seed: int | None = None
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "status": self.status,
            "worst_margin": self.worst_margin,
            "n_samples": self.n_samples,
            "seed": self.seed,
        }
        if self.witness is not None:
            out["witness"] = self.witness
        if self.detail:
            out["detail"] = self.detail
        return out


@dataclass
class VerificationReport:
    """A collection of check results; passes iff every non-skipped check does."""

    checks: list[CheckResult] = field(default_factory=list)

    def add(self, result: CheckResult) -> None:
        self.checks.append(result)

    def extend(self, results) -> None:
        self.checks.extend(results)

    @property
    def passed(self) -> bool:
        return all(c.status == PASS for c in self.checks if c.status != SKIPPED)

    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if c.status == FAIL]

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
        }

    def table(self) -> str:
        """Human-readable fixed-width summary, one line per check."""
        lines = []
        name_w = max([len(c.name) for c in self.checks] + [5])
        for c in self.checks:
            margin = "" if c.status == SKIPPED else f" margin={c.worst_margin:.6g}"
            lines.append(f"{c.name:<{name_w}}  {c.status.upper():<7}{margin}")
        lines.append(f"{'overall':<{name_w}}  {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)
