"""
Domain Layer - Refinement Traces

A refinement check answers whether the game a strategy plays also plays a
given target game. The answer is a trace of the steps that justified it,
ending in a failure step when it did not go through.

Key principles:
- A successful trace contains no failure step
- Failure is an outcome, not an exception: the trace records where the two
  games stopped matching and why
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional

from src.domain.entities.formula import Formula
from src.domain.entities.goal import VerdictCertificate
from src.domain.entities.source import SourceSpan


class StepKind(str, Enum):
    MATCH = "structural-match"
    REASSOCIATE = "reassociate"
    DUAL_CANCEL = "dual-cancel"
    DISTRIBUTE = "distribute"
    DROP_TEST = "drop-test"
    GHOST_ERASE = "ghost-erase"
    ASSIGN_REFINES_RANDOM = "assign-refines-random"
    TEST_STRENGTHEN = "test-strengthening"
    FAILURE = "failure"


@dataclass(frozen=True)
class RefinementStep:
    kind: StepKind
    detail: str = ""
    span: Optional[SourceSpan] = None

    def __str__(self) -> str:
        where = f"{self.span}: " if self.span is not None else ""
        return f"{where}{self.kind.value}" + (f" ({self.detail})" if self.detail else "")


@dataclass
class RefinementTrace:
    steps: List[RefinementStep] = field(default_factory=list)

    @property
    def failure(self) -> Optional[RefinementStep]:
        for step in self.steps:
            if step.kind == StepKind.FAILURE:
                return step
        return None

    @property
    def ok(self) -> bool:
        return self.failure is None

    def count(self, kind: StepKind) -> int:
        return sum(1 for s in self.steps if s.kind == kind)


@dataclass
class ProvesOutcome:
    """
    Result of a `proves` query: the refinement trace and the check that the
    strategy's postcondition implies the target's.
    """

    target: Formula
    trace: RefinementTrace
    postcondition: Optional[VerdictCertificate] = None
    message: str = ""

    @property
    def ok(self) -> bool:
        return (
            self.trace.ok
            and self.postcondition is not None
            and self.postcondition.is_valid
        )

    def describe(self) -> str:
        if self.ok:
            return "proves: refinement and postcondition both hold"
        failure = self.trace.failure
        if failure is not None:
            return f"refinement failed at {failure}"
        return self.message or "postcondition does not imply the target"
